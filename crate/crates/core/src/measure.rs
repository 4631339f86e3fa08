//! Sample spaces, finite positive measures and integration against them.
//!
//! A sample space is either a finite set of labelled atoms or a bounded
//! interval discretized by a quadrature grid. Measures on an interval are
//! stored as density values at the grid nodes, so every integral is a finite
//! weighted sum. Finite Dirac combinations may sit at arbitrary points of an
//! interval; test functions are evaluated there by piecewise-linear
//! interpolation between nodes.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::{compensated_sum, Scalar};

/// Grid size used by [`SampleSpace::uniform_grid`] callers that do not pick one.
pub const DEFAULT_GRID_NODES: usize = 512;

/// Tolerance for identities that hold exactly in real arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Tolerance for identities limited by quadrature resolution.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Scalar"))]
pub enum SpaceKind<T> {
    Discrete {
        labels: Vec<String>,
    },
    Interval {
        lower: T,
        upper: T,
        nodes: Vec<T>,
        weights: Vec<T>,
    },
}

/// A sample space: discrete atoms or a quadrature-discretized interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpaceKind<T>", into = "SpaceKind<T>")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct SampleSpace<T> {
    kind: Arc<SpaceKind<T>>,
}

impl<T: Scalar> PartialEq for SampleSpace<T> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.kind, &other.kind) || self.kind == other.kind
    }
}

impl<T: Scalar> TryFrom<SpaceKind<T>> for SampleSpace<T> {
    type Error = Error;

    fn try_from(kind: SpaceKind<T>) -> Result<Self> {
        match kind {
            SpaceKind::Discrete { labels } => Self::discrete(labels),
            SpaceKind::Interval {
                lower,
                upper,
                nodes,
                weights,
            } => Self::interval(lower, upper, nodes, weights),
        }
    }
}

impl<T: Scalar> From<SampleSpace<T>> for SpaceKind<T> {
    fn from(space: SampleSpace<T>) -> Self {
        (*space.kind).clone()
    }
}

/// A point of a sample space: an atom/node index or a real point of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location<T> {
    Node(usize),
    Point(T),
}

impl<T: Scalar> SampleSpace<T> {
    pub fn discrete<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidSpace("a discrete space needs at least one atom".into()));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpace("atom labels must be pairwise distinct".into()));
        }
        Ok(Self {
            kind: Arc::new(SpaceKind::Discrete { labels }),
        })
    }

    /// Discrete space with atoms labelled `0, 1, …, n-1`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::discrete((0..n).map(|i| i.to_string()))
    }

    pub fn interval(lower: T, upper: T, nodes: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
            return Err(Error::InvalidSpace(format!(
                "interval bounds must be finite with lower < upper, got [{lower}, {upper}]"
            )));
        }
        if nodes.len() < 2 {
            return Err(Error::InvalidSpace("an interval grid needs at least two nodes".into()));
        }
        if nodes.len() != weights.len() {
            return Err(Error::InvalidSpace(format!(
                "{} nodes but {} quadrature weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpace("nodes must be strictly increasing".into()));
        }
        if nodes.iter().any(|&t| t < lower || t > upper || !t.is_finite()) {
            return Err(Error::InvalidSpace("nodes must lie inside [lower, upper]".into()));
        }
        if weights.iter().any(|&w| !(w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidSpace(
                "quadrature weights must be strictly positive".into(),
            ));
        }
        Ok(Self {
            kind: Arc::new(SpaceKind::Interval {
                lower,
                upper,
                nodes,
                weights,
            }),
        })
    }

    /// Composite midpoint grid with `n` equal cells.
    pub fn uniform_grid(lower: T, upper: T, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSpace("an interval grid needs at least two nodes".into()));
        }
        let width = (upper - lower) / T::of_usize(n);
        let nodes = (0..n).map(|i| lower + width * (T::of_usize(i) + T::of(0.5))).collect();
        Self::interval(lower, upper, nodes, vec![width; n])
    }

    /// Composite Gauss–Legendre grid: `panels` equal panels with `order` nodes each.
    pub fn gauss_legendre_grid(lower: T, upper: T, panels: usize, order: usize) -> Result<Self> {
        if panels == 0 || order == 0 {
            return Err(Error::InvalidSpace("panels and order must be positive".into()));
        }
        let (x, w) = gauss_legendre(order);
        let width = (upper - lower) / T::of_usize(panels);
        let half = T::of(0.5) * width;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let center = lower + width * (T::of_usize(p) + T::of(0.5));
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(center + half * T::of(*xi));
                weights.push(half * T::of(*wi));
            }
        }
        Self::interval(lower, upper, nodes, weights)
    }

    /// Grid on `[lower, upper]` that is Gauss–Legendre in `ln t` over
    /// `[ln cutoff, ln upper]`. Resolves integrands spread over many decades
    /// near the lower end; the slab `[lower, cutoff)` carries no nodes.
    pub fn log_graded_grid(lower: T, cutoff: T, upper: T, panels: usize, order: usize) -> Result<Self> {
        if !(cutoff > T::zero()) || cutoff <= lower || cutoff >= upper {
            return Err(Error::InvalidSpace(
                "log-graded grid needs 0 < cutoff, lower < cutoff < upper".into(),
            ));
        }
        let log_grid = Self::gauss_legendre_grid(cutoff.ln(), upper.ln(), panels, order)?;
        let (s, w) = match log_grid.kind() {
            SpaceKind::Interval { nodes, weights, .. } => (nodes.clone(), weights.clone()),
            SpaceKind::Discrete { .. } => unreachable!(),
        };
        let nodes: Vec<T> = s.iter().map(|s| s.exp()).collect();
        let weights = nodes.iter().zip(&w).map(|(t, w)| *t * *w).collect();
        Self::interval(lower, upper, nodes, weights)
    }

    pub fn kind(&self) -> &SpaceKind<T> {
        &self.kind
    }

    pub fn len(&self) -> usize {
        match self.kind() {
            SpaceKind::Discrete { labels } => labels.len(),
            SpaceKind::Interval { nodes, .. } => nodes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.kind(), SpaceKind::Discrete { .. })
    }

    /// Quadrature weight of node `i` (1 for atoms).
    pub fn weight(&self, i: usize) -> T {
        match self.kind() {
            SpaceKind::Discrete { .. } => T::one(),
            SpaceKind::Interval { weights, .. } => weights[i],
        }
    }

    pub fn labels(&self) -> Option<&[String]> {
        match self.kind() {
            SpaceKind::Discrete { labels } => Some(labels),
            SpaceKind::Interval { .. } => None,
        }
    }

    pub fn atom_index(&self, label: &str) -> Option<usize> {
        self.labels()?.iter().position(|l| l == label)
    }

    /// Real coordinate of node `i`: the node position on an interval, the
    /// numeric value of the label on a discrete space (the index if the
    /// label is not a number).
    pub fn node_coordinate(&self, i: usize) -> T {
        match self.kind() {
            SpaceKind::Discrete { labels } => labels[i].parse::<f64>().map(T::of).unwrap_or_else(|_| T::of_usize(i)),
            SpaceKind::Interval { nodes, .. } => nodes[i],
        }
    }

    pub fn coordinate(&self, loc: &Location<T>) -> T {
        match *loc {
            Location::Node(i) => self.node_coordinate(i),
            Location::Point(t) => t,
        }
    }

    pub fn bounds(&self) -> Option<(T, T)> {
        match self.kind() {
            SpaceKind::Interval { lower, upper, .. } => Some((*lower, *upper)),
            SpaceKind::Discrete { .. } => None,
        }
    }

    pub fn check_location(&self, loc: &Location<T>) -> Result<()> {
        match (self.kind(), loc) {
            (_, Location::Node(i)) if *i < self.len() => Ok(()),
            (_, Location::Node(i)) => Err(Error::InvalidParameter(format!(
                "node index {i} out of range for a space of {} points",
                self.len()
            ))),
            (SpaceKind::Interval { lower, upper, .. }, Location::Point(t)) => {
                if *t >= *lower && *t <= *upper {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("point {t} outside [{lower}, {upper}]")))
                }
            }
            (SpaceKind::Discrete { .. }, Location::Point(_)) => Err(Error::InvalidParameter(
                "real points are only meaningful on interval spaces".into(),
            )),
        }
    }

    pub(crate) fn ensure_same(&self, other: &Self, context: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(context.to_string()))
        }
    }
}

/// A finite positive measure with atom masses (discrete) or node densities (interval).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawValues<T>", into = "RawValues<T>")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct Measure<T: Scalar> {
    space: SampleSpace<T>,
    values: Vec<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct RawValues<T: Scalar> {
    pub space: SampleSpace<T>,
    pub values: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounded: Option<bool>,
}

impl<T: Scalar> TryFrom<RawValues<T>> for Measure<T> {
    type Error = Error;
    fn try_from(raw: RawValues<T>) -> Result<Self> {
        Measure::new(raw.space, raw.values)
    }
}

impl<T: Scalar> From<Measure<T>> for RawValues<T> {
    fn from(m: Measure<T>) -> Self {
        RawValues {
            space: m.space,
            values: m.values,
            bounded: None,
        }
    }
}

impl<T: Scalar> Measure<T> {
    pub fn new(space: SampleSpace<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidMeasure("values must be finite and non-negative".into()));
        }
        let m = Self { space, values };
        if !(m.mass() > T::zero()) {
            return Err(Error::InvalidMeasure("total mass must be positive".into()));
        }
        Ok(m)
    }

    /// Counting measure (discrete) or Lebesgue measure (interval).
    pub fn reference(space: &SampleSpace<T>) -> Self {
        Self {
            values: vec![T::one(); space.len()],
            space: space.clone(),
        }
    }

    pub fn space(&self) -> &SampleSpace<T> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Mass carried by node or atom `i`.
    pub fn node_mass(&self, i: usize) -> T {
        self.values[i] * self.space.weight(i)
    }

    pub fn node_masses(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.node_mass(i)).collect()
    }

    pub fn mass(&self) -> T {
        compensated_sum((0..self.values.len()).map(|i| self.node_mass(i)))
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.space.clone(), self.values.iter().map(|v| *v * factor).collect())
    }
}

/// A real function on a sample space, known at its atoms or grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawValues<T>", into = "RawValues<T>")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct TestFunction<T: Scalar> {
    space: SampleSpace<T>,
    values: Vec<T>,
    bounded: bool,
}

impl<T: Scalar> TryFrom<RawValues<T>> for TestFunction<T> {
    type Error = Error;
    fn try_from(raw: RawValues<T>) -> Result<Self> {
        TestFunction::new(raw.space, raw.values, raw.bounded.unwrap_or(true))
    }
}

impl<T: Scalar> From<TestFunction<T>> for RawValues<T> {
    fn from(f: TestFunction<T>) -> Self {
        RawValues {
            space: f.space,
            values: f.values,
            bounded: Some(f.bounded),
        }
    }
}

impl<T: Scalar> TestFunction<T> {
    pub fn new(space: SampleSpace<T>, values: Vec<T>, bounded: bool) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidFunction(format!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction("values must be finite".into()));
        }
        Ok(Self { space, values, bounded })
    }

    /// Samples `f` at the coordinate of every atom or node.
    pub fn from_fn(space: &SampleSpace<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let values = (0..space.len()).map(|i| f(space.node_coordinate(i))).collect();
        Self::new(space.clone(), values, true)
    }

    pub fn constant(space: &SampleSpace<T>, c: T) -> Self {
        Self {
            values: vec![c; space.len()],
            space: space.clone(),
            bounded: true,
        }
    }

    pub fn indicator(space: &SampleSpace<T>, i: usize) -> Self {
        let mut values = vec![T::zero(); space.len()];
        values[i] = T::one();
        Self {
            values,
            space: space.clone(),
            bounded: true,
        }
    }

    pub fn space(&self) -> &SampleSpace<T> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn with_bounded(mut self, bounded: bool) -> Self {
        self.bounded = bounded;
        self
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Value at a location; real points on an interval are linearly
    /// interpolated (and extrapolated beyond the outermost nodes).
    pub fn value_at(&self, loc: &Location<T>) -> T {
        match *loc {
            Location::Node(i) => self.values[i],
            Location::Point(t) => match self.space.kind() {
                SpaceKind::Interval { nodes, .. } => interpolate(nodes, &self.values, t),
                SpaceKind::Discrete { .. } => {
                    // Points on discrete spaces are rejected by `check_location`;
                    // fall back to the atom whose coordinate matches.
                    (0..self.space.len())
                        .find(|&i| self.space.node_coordinate(i) == t)
                        .map(|i| self.values[i])
                        .unwrap_or_else(T::nan)
                }
            },
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.space.clone(),
            self.values.iter().map(|v| f(*v)).collect(),
            self.bounded,
        )
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.space
            .ensure_same(&other.space, "pointwise combination of test functions")?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Self::new(self.space.clone(), values, self.bounded && other.bounded)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(|v| *v * c).collect(),
            bounded: self.bounded,
        }
    }
}

fn interpolate<T: Scalar>(nodes: &[T], values: &[T], t: T) -> T {
    let n = nodes.len();
    let right = nodes.partition_point(|&x| x <= t).clamp(1, n - 1);
    let left = right - 1;
    let (x0, x1) = (nodes[left], nodes[right]);
    let (y0, y1) = (values[left], values[right]);
    y0 + (y1 - y0) * (t - x0) / (x1 - x0)
}

/// A finite positive combination of Dirac masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDirac<T>", into = "RawDirac<T>")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct DiracCombination<T: Scalar> {
    space: SampleSpace<T>,
    points: Vec<Location<T>>,
    coefficients: Vec<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub enum SupportPoint<T> {
    Atom(String),
    Real(T),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct RawDirac<T: Scalar> {
    pub space: SampleSpace<T>,
    pub points: Vec<SupportPoint<T>>,
    pub values: Vec<T>,
}

impl<T: Scalar> TryFrom<RawDirac<T>> for DiracCombination<T> {
    type Error = Error;
    fn try_from(raw: RawDirac<T>) -> Result<Self> {
        let points = raw
            .points
            .into_iter()
            .map(|p| match p {
                SupportPoint::Atom(label) => raw
                    .space
                    .atom_index(&label)
                    .map(Location::Node)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown atom label {label:?}"))),
                SupportPoint::Real(t) => Ok(Location::Point(t)),
            })
            .collect::<Result<Vec<_>>>()?;
        DiracCombination::new(raw.space, points, raw.values)
    }
}

impl<T: Scalar> From<DiracCombination<T>> for RawDirac<T> {
    fn from(d: DiracCombination<T>) -> Self {
        let points = d
            .points
            .iter()
            .map(|loc| match (d.space.labels(), loc) {
                (Some(labels), Location::Node(i)) => SupportPoint::Atom(labels[*i].clone()),
                _ => SupportPoint::Real(d.space.coordinate(loc)),
            })
            .collect();
        RawDirac {
            space: d.space,
            points,
            values: d.coefficients,
        }
    }
}

impl<T: Scalar> DiracCombination<T> {
    pub fn new(space: SampleSpace<T>, points: Vec<Location<T>>, coefficients: Vec<T>) -> Result<Self> {
        if points.len() != coefficients.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} support points but {} coefficients",
                points.len(),
                coefficients.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::InvalidMeasure(
                "a Dirac combination needs at least one atom".into(),
            ));
        }
        if coefficients.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidMeasure("coefficients must be finite and positive".into()));
        }
        for p in &points {
            space.check_location(p)?;
        }
        Ok(Self {
            space,
            points,
            coefficients,
        })
    }

    /// A single Dirac mass.
    pub fn dirac(space: &SampleSpace<T>, at: Location<T>, mass: T) -> Result<Self> {
        Self::new(space.clone(), vec![at], vec![mass])
    }

    pub fn space(&self) -> &SampleSpace<T> {
        &self.space
    }

    pub fn points(&self) -> &[Location<T>] {
        &self.points
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn mass(&self) -> T {
        compensated_sum(self.coefficients.iter().copied())
    }

    /// The same measure as atom masses or node densities, when every
    /// support point is an atom or grid node.
    pub fn to_measure(&self) -> Result<Measure<T>> {
        let mut values = vec![T::zero(); self.space.len()];
        for (p, c) in self.points.iter().zip(&self.coefficients) {
            match p {
                Location::Node(i) => values[*i] += *c / self.space.weight(*i),
                Location::Point(_) => {
                    return Err(Error::InvalidMeasure(
                        "off-grid Dirac masses have no density on the grid".into(),
                    ))
                }
            }
        }
        Measure::new(self.space.clone(), values)
    }
}

/// Either a grid measure or a Dirac combination; the base of a mixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub enum BaseMeasure<T: Scalar> {
    Grid(Measure<T>),
    Atomic(DiracCombination<T>),
}

impl<T: Scalar> From<Measure<T>> for BaseMeasure<T> {
    fn from(m: Measure<T>) -> Self {
        BaseMeasure::Grid(m)
    }
}

impl<T: Scalar> From<DiracCombination<T>> for BaseMeasure<T> {
    fn from(d: DiracCombination<T>) -> Self {
        BaseMeasure::Atomic(d)
    }
}

/// Anything that integrates test functions: a finite weighted support.
pub trait FiniteMeasure<T: Scalar> {
    fn space(&self) -> &SampleSpace<T>;

    /// Every support location with its mass.
    fn weighted_support(&self) -> Vec<(Location<T>, T)>;

    fn total_mass(&self) -> T {
        compensated_sum(self.weighted_support().into_iter().map(|(_, m)| m))
    }
}

impl<T: Scalar> FiniteMeasure<T> for Measure<T> {
    fn space(&self) -> &SampleSpace<T> {
        &self.space
    }

    fn weighted_support(&self) -> Vec<(Location<T>, T)> {
        (0..self.values.len())
            .map(|i| (Location::Node(i), self.node_mass(i)))
            .collect()
    }
}

impl<T: Scalar> FiniteMeasure<T> for DiracCombination<T> {
    fn space(&self) -> &SampleSpace<T> {
        &self.space
    }

    fn weighted_support(&self) -> Vec<(Location<T>, T)> {
        self.points
            .iter()
            .copied()
            .zip(self.coefficients.iter().copied())
            .collect()
    }
}

impl<T: Scalar> FiniteMeasure<T> for BaseMeasure<T> {
    fn space(&self) -> &SampleSpace<T> {
        match self {
            BaseMeasure::Grid(m) => m.space(),
            BaseMeasure::Atomic(d) => d.space(),
        }
    }

    fn weighted_support(&self) -> Vec<(Location<T>, T)> {
        match self {
            BaseMeasure::Grid(m) => m.weighted_support(),
            BaseMeasure::Atomic(d) => d.weighted_support(),
        }
    }
}

/// `∫ g(f₁, …, f_k) dμ` for pointwise integrand `g` of the listed functions.
pub fn integrate_map<T: Scalar, M: FiniteMeasure<T> + ?Sized>(
    mu: &M,
    functions: &[&TestFunction<T>],
    integrand: impl Fn(&[T]) -> T,
) -> Result<T> {
    for f in functions {
        f.space()
            .ensure_same(mu.space(), "function and measure live on different spaces")?;
    }
    let mut point = vec![T::zero(); functions.len()];
    let terms = mu.weighted_support().into_iter().map(|(loc, mass)| {
        for (slot, f) in point.iter_mut().zip(functions) {
            *slot = f.value_at(&loc);
        }
        integrand(&point) * mass
    });
    let terms: Vec<T> = terms.collect();
    Ok(compensated_sum(terms))
}

pub fn integrate<T: Scalar, M: FiniteMeasure<T> + ?Sized>(f: &TestFunction<T>, mu: &M) -> Result<T> {
    integrate_map(mu, &[f], |v| v[0])
}

/// `(∫|f|ᵖ dμ)^{1/p}` for `p ≥ 1`.
pub fn lp_norm<T: Scalar, M: FiniteMeasure<T> + ?Sized>(f: &TestFunction<T>, mu: &M, p: T) -> Result<T> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Lp exponent must satisfy p >= 1, got {p}"
        )));
    }
    let scale = f.sup_norm();
    if scale == T::zero() {
        return Ok(T::zero());
    }
    // Normalize by the sup norm so large exponents do not overflow.
    let inner = integrate_map(mu, &[f], |v| (v[0].abs() / scale).powf(p))?;
    Ok(scale * inner.powf(p.recip()))
}

/// `‖f − g‖_{Lᵖ(μ)}`.
pub fn lp_distance<T: Scalar, M: FiniteMeasure<T> + ?Sized>(
    f: &TestFunction<T>,
    g: &TestFunction<T>,
    mu: &M,
    p: T,
) -> Result<T> {
    lp_norm(&f.sub(g)?, mu, p)
}

/// True iff `|∫fᵢ d(center) − ∫fᵢ d(candidate)| < eps` for every test function.
pub fn weak_contains<T: Scalar, A: FiniteMeasure<T> + ?Sized, B: FiniteMeasure<T> + ?Sized>(
    center: &A,
    tests: &[TestFunction<T>],
    eps: T,
    candidate: &B,
) -> Result<bool> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    center
        .space()
        .ensure_same(candidate.space(), "weak neighbourhood and candidate")?;
    for f in tests {
        if (integrate(f, center)? - integrate(f, candidate)?).abs() >= eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The measure `φ·μ` for a strictly positive density `φ`.
pub fn rescale_reference<T: Scalar>(mu: &Measure<T>, phi: &TestFunction<T>) -> Result<Measure<T>> {
    phi.space().ensure_same(mu.space(), "rescaling density and measure")?;
    if phi.values().iter().any(|v| !(*v > T::zero())) {
        return Err(Error::InvalidFunction(
            "rescaling density must be strictly positive".into(),
        ));
    }
    let values = mu.values().iter().zip(phi.values()).map(|(m, p)| *m * *p).collect();
    Measure::new(mu.space().clone(), values)
}

/// A finite partition of a sample space into cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub enum CellPartition<T> {
    /// Cells `[e₀,e₁), [e₁,e₂), …, [e_{m-1}, e_m]` of an interval.
    Intervals { edges: Vec<T> },
    /// Disjoint atom-index cells of a discrete space.
    Atoms { cells: Vec<Vec<usize>> },
}

impl<T: Scalar> CellPartition<T> {
    /// `cells` equal subintervals of an interval space.
    pub fn uniform(space: &SampleSpace<T>, cells: usize) -> Result<Self> {
        let (lower, upper) = space
            .bounds()
            .ok_or_else(|| Error::InvalidParameter("uniform partitions need an interval space".into()))?;
        if cells == 0 {
            return Err(Error::InvalidParameter("a partition needs at least one cell".into()));
        }
        let width = (upper - lower) / T::of_usize(cells);
        let mut edges: Vec<T> = (0..cells).map(|i| lower + width * T::of_usize(i)).collect();
        edges.push(upper);
        Ok(Self::Intervals { edges })
    }

    /// Singleton cells on a discrete space.
    pub fn atoms(space: &SampleSpace<T>) -> Self {
        Self::Atoms {
            cells: (0..space.len()).map(|i| vec![i]).collect(),
        }
    }

    pub fn cell_count(&self) -> usize {
        match self {
            Self::Intervals { edges } => edges.len().saturating_sub(1),
            Self::Atoms { cells } => cells.len(),
        }
    }

    pub fn validate(&self, space: &SampleSpace<T>) -> Result<()> {
        match (self, space.kind()) {
            (Self::Intervals { edges }, SpaceKind::Interval { lower, upper, .. }) => {
                if edges.len() < 2 {
                    return Err(Error::PartitionCoverage("need at least two edges".into()));
                }
                if edges[0] != *lower || edges[edges.len() - 1] != *upper {
                    return Err(Error::PartitionCoverage(format!(
                        "edges span [{}, {}] but the space is [{lower}, {upper}]",
                        edges[0],
                        edges[edges.len() - 1]
                    )));
                }
                if edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::PartitionCoverage("edges must be strictly increasing".into()));
                }
                Ok(())
            }
            (Self::Atoms { cells }, SpaceKind::Discrete { labels }) => {
                let mut seen = vec![false; labels.len()];
                for &i in cells.iter().flatten() {
                    if i >= labels.len() {
                        return Err(Error::PartitionCoverage(format!("atom {i} does not exist")));
                    }
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(Error::PartitionCoverage(format!("atom {i} lies in two cells")));
                    }
                }
                if cells.iter().any(|c| c.is_empty()) {
                    return Err(Error::PartitionCoverage("cells must be non-empty".into()));
                }
                match seen.iter().position(|s| !s) {
                    Some(i) => Err(Error::PartitionCoverage(format!("atom {i} is in no cell"))),
                    None => Ok(()),
                }
            }
            _ => Err(Error::SpaceMismatch(
                "partition kind does not match the space kind".into(),
            )),
        }
    }

    /// Cell index containing a location (assumes a validated partition).
    pub fn cell_of(&self, space: &SampleSpace<T>, loc: &Location<T>) -> usize {
        match self {
            Self::Intervals { edges } => {
                let t = space.coordinate(loc);
                edges.partition_point(|&e| e <= t).clamp(1, edges.len() - 1) - 1
            }
            Self::Atoms { cells } => {
                let i = match loc {
                    Location::Node(i) => *i,
                    Location::Point(_) => usize::MAX,
                };
                cells.iter().position(|c| c.contains(&i)).unwrap_or(0)
            }
        }
    }

    /// Coarsest partition refining every input partition.
    pub fn common_refinement(space: &SampleSpace<T>, partitions: &[&CellPartition<T>]) -> Result<Self> {
        for p in partitions {
            p.validate(space)?;
        }
        match space.kind() {
            SpaceKind::Interval { lower, upper, .. } => {
                let mut edges = vec![*lower, *upper];
                for p in partitions {
                    if let Self::Intervals { edges: e } = p {
                        edges.extend_from_slice(e);
                    }
                }
                edges.sort_by(|a, b| a.partial_cmp(b).expect("finite edges"));
                edges.dedup();
                Ok(Self::Intervals { edges })
            }
            SpaceKind::Discrete { labels } => {
                let signature = |i: usize| -> Vec<usize> {
                    partitions
                        .iter()
                        .map(|p| p.cell_of(space, &Location::Node(i)))
                        .collect()
                };
                let mut cells: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
                for i in 0..labels.len() {
                    let sig = signature(i);
                    match cells.iter_mut().find(|(s, _)| *s == sig) {
                        Some((_, members)) => members.push(i),
                        None => cells.push((sig, vec![i])),
                    }
                }
                Ok(Self::Atoms {
                    cells: cells.into_iter().map(|(_, m)| m).collect(),
                })
            }
        }
    }

    /// True iff every cell of `finer` lies inside a cell of `self`, and `finer` has more cells.
    pub fn strictly_refined_by(&self, finer: &Self) -> bool {
        match (self, finer) {
            (Self::Intervals { edges: coarse }, Self::Intervals { edges: fine }) => {
                fine.len() > coarse.len() && coarse.iter().all(|e| fine.contains(e))
            }
            (Self::Atoms { cells: coarse }, Self::Atoms { cells: fine }) => {
                fine.len() > coarse.len()
                    && fine
                        .iter()
                        .all(|f| coarse.iter().any(|c| f.iter().all(|i| c.contains(i))))
            }
            _ => false,
        }
    }
}

/// A function that is constant on the cells of a finite partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct StepFunction<T> {
    partition: CellPartition<T>,
    values: Vec<T>,
}

impl<T: Scalar> StepFunction<T> {
    pub fn new(partition: CellPartition<T>, values: Vec<T>) -> Result<Self> {
        if partition.cell_count() != values.len() {
            return Err(Error::InvalidFunction(format!(
                "{} cell values for {} cells",
                values.len(),
                partition.cell_count()
            )));
        }
        Ok(Self { partition, values })
    }

    /// Cell averages of `f` with respect to `mu` (zero on null cells).
    pub fn cell_average(partition: CellPartition<T>, f: &TestFunction<T>, mu: &Measure<T>) -> Result<Self> {
        partition.validate(mu.space())?;
        f.space().ensure_same(mu.space(), "step approximation of a function")?;
        let mut num = vec![T::zero(); partition.cell_count()];
        let mut den = vec![T::zero(); partition.cell_count()];
        for (loc, m) in mu.weighted_support() {
            let c = partition.cell_of(mu.space(), &loc);
            num[c] += f.value_at(&loc) * m;
            den[c] += m;
        }
        let values = num
            .into_iter()
            .zip(den)
            .map(|(n, d)| if d > T::zero() { n / d } else { T::zero() })
            .collect();
        Self::new(partition, values)
    }

    pub fn partition(&self) -> &CellPartition<T> {
        &self.partition
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value_at(&self, space: &SampleSpace<T>, loc: &Location<T>) -> T {
        self.values[self.partition.cell_of(space, loc)]
    }

    pub fn to_test_function(&self, space: &SampleSpace<T>) -> Result<TestFunction<T>> {
        self.partition.validate(space)?;
        let values = (0..space.len())
            .map(|i| self.value_at(space, &Location::Node(i)))
            .collect();
        TestFunction::new(space.clone(), values, true)
    }

    /// `∫ g dμ`, reading the step value of each support location directly.
    pub fn integrate<M: FiniteMeasure<T> + ?Sized>(&self, mu: &M) -> Result<T> {
        self.partition.validate(mu.space())?;
        let space = mu.space();
        Ok(compensated_sum(
            mu.weighted_support()
                .into_iter()
                .map(|(loc, m)| self.value_at(space, &loc) * m),
        ))
    }
}

/// Replaces `mu` by one Dirac mass per cell of the common refinement of the
/// generators' partitions, carrying the cell's mass. Integrals of every
/// generator and the total mass are preserved; null cells are dropped.
/// Representatives are cell midpoints on intervals and the first charged
/// atom on discrete spaces.
pub fn dirac_approximate<T: Scalar>(mu: &Measure<T>, generators: &[StepFunction<T>]) -> Result<DiracCombination<T>> {
    let space = mu.space();
    let partitions: Vec<&CellPartition<T>> = generators.iter().map(|g| g.partition()).collect();
    let refinement = if partitions.is_empty() {
        match space.kind() {
            SpaceKind::Interval { lower, upper, .. } => CellPartition::Intervals {
                edges: vec![*lower, *upper],
            },
            SpaceKind::Discrete { labels } => CellPartition::Atoms {
                cells: vec![(0..labels.len()).collect()],
            },
        }
    } else {
        CellPartition::common_refinement(space, &partitions)?
    };
    let cells = refinement.cell_count();
    let mut masses = vec![Vec::new(); cells];
    let mut first_charged: Vec<Option<usize>> = vec![None; cells];
    for (i, m) in mu.node_masses().into_iter().enumerate() {
        let c = refinement.cell_of(space, &Location::Node(i));
        masses[c].push(m);
        if m > T::zero() && first_charged[c].is_none() {
            first_charged[c] = Some(i);
        }
    }
    let mut points = Vec::new();
    let mut coefficients = Vec::new();
    for (c, cell_masses) in masses.into_iter().enumerate() {
        let mass = compensated_sum(cell_masses);
        if !(mass > T::zero()) {
            continue;
        }
        let representative = match &refinement {
            CellPartition::Intervals { edges } => Location::Point(T::of(0.5) * (edges[c] + edges[c + 1])),
            CellPartition::Atoms { .. } => Location::Node(first_charged[c].expect("charged cell")),
        };
        points.push(representative);
        coefficients.push(mass);
    }
    DiracCombination::new(space.clone(), points, coefficients)
}
