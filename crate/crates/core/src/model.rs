//! Parametrized measure models `x ↦ p(x) = p̄(x, ·)·μ` over a box of
//! parameters, their scores `∂_V ln p̄` and integrability diagnostics.
//!
//! Densities are stored through their logarithm, so `p̄ > 0` holds by
//! construction and tails that underflow to zero mass stay well defined.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{lp_norm, Measure, SampleSpace, TestFunction};
use crate::scalar::Scalar;
use crate::statistic::{pushforward_function, pushforward_measure, Statistic};
use crate::topology::{converges_mixed, ConvergenceReport, MixedPoint, ProbeBanks, ProbeSettings};

/// `(x, ω-index) ↦ ln p̄(x, ω)`.
pub type LogDensityFn<T> = Arc<dyn Fn(&[T], usize) -> T + Send + Sync>;
/// `(x, V, ω-index) ↦ ∂_V ln p̄(x, ω)`.
pub type ScoreFn<T> = Arc<dyn Fn(&[T], &[T], usize) -> T + Send + Sync>;

/// Default central-difference step, relative to the parameter box width.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Tolerance on `|mass(p(x)) − 1|` for models flagged statistical.
pub const STATISTICAL_MASS_TOLERANCE: f64 = 1e-9;

/// An open axis-aligned box; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ParamBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> ParamBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidParameter(
                "box bounds must have equal positive length".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidParameter("box needs lower < upper on every axis".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn interval(lower: T, upper: T) -> Result<Self> {
        Self::new(vec![lower], vec![upper])
    }

    /// `ℝ^d`.
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![T::neg_infinity(); dim],
            upper: vec![T::infinity(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| v.is_finite() && *l < *v && *v < *u)
    }

    /// Smallest finite side length, or 1 if every axis is unbounded.
    pub fn scale(&self) -> T {
        let widths = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| *u - *l)
            .filter(|w| w.is_finite());
        widths
            .fold(None, |m: Option<T>, w| Some(m.map_or(w, |m| m.min(w))))
            .unwrap_or(T::one())
    }

    /// A deterministic interior point.
    pub fn interior_point(&self) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| match (l.is_finite(), u.is_finite()) {
                (true, true) => T::of(0.5) * (*l + *u),
                (true, false) => *l + T::one(),
                (false, true) => *u - T::one(),
                (false, false) => T::zero(),
            })
            .collect()
    }
}

/// A base point and a direction in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct TangentDirection<T> {
    pub point: Vec<T>,
    pub direction: Vec<T>,
}

impl<T: Scalar> TangentDirection<T> {
    pub fn new(point: Vec<T>, direction: Vec<T>) -> Result<Self> {
        if point.len() != direction.len() {
            return Err(Error::InvalidParameter(format!(
                "point has dimension {} but direction {}",
                point.len(),
                direction.len()
            )));
        }
        if direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("direction must be finite".into()));
        }
        Ok(Self { point, direction })
    }

    pub fn scalar(x: T, v: T) -> Self {
        Self {
            point: vec![x],
            direction: vec![v],
        }
    }
}

/// A finite-dimensional parametrized measure model `(M, Ω, μ, p)`.
#[derive(Clone)]
pub struct ParametrizedModel<T: Scalar> {
    name: String,
    domain: ParamBox<T>,
    reference: Measure<T>,
    log_density: LogDensityFn<T>,
    analytic_score: Option<ScoreFn<T>>,
    statistical: bool,
}

impl<T: Scalar> fmt::Debug for ParametrizedModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizedModel")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("space_len", &self.reference.space().len())
            .field("analytic_score", &self.analytic_score.is_some())
            .field("statistical", &self.statistical)
            .finish()
    }
}

impl<T: Scalar> ParametrizedModel<T> {
    pub fn new(
        name: impl Into<String>,
        domain: ParamBox<T>,
        reference: Measure<T>,
        log_density: LogDensityFn<T>,
        analytic_score: Option<ScoreFn<T>>,
        statistical: bool,
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            domain,
            reference,
            log_density,
            analytic_score,
            statistical,
        };
        let probe = model.domain.interior_point();
        let p = model.density_at(&probe)?;
        if statistical {
            let gap = (p.mass() - T::one()).abs();
            if gap > T::of(STATISTICAL_MASS_TOLERANCE) {
                return Err(Error::InvalidParameter(format!(
                    "model {:?} is flagged statistical but has mass off by {gap}",
                    model.name
                )));
            }
        }
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn param_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &ParamBox<T> {
        &self.domain
    }

    pub fn space(&self) -> &SampleSpace<T> {
        self.reference.space()
    }

    pub fn reference(&self) -> &Measure<T> {
        &self.reference
    }

    pub fn is_statistical(&self) -> bool {
        self.statistical
    }

    pub fn has_analytic_score(&self) -> bool {
        self.analytic_score.is_some()
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(format!("{x:?} not inside {:?}", self.domain)))
        }
    }

    fn check_direction(&self, td: &TangentDirection<T>) -> Result<()> {
        if td.direction.len() != self.param_dim() {
            return Err(Error::InvalidParameter(format!(
                "direction has dimension {}, model has {}",
                td.direction.len(),
                self.param_dim()
            )));
        }
        self.check_point(&td.point)
    }

    pub fn log_density(&self, x: &[T], atom: usize) -> Result<T> {
        let v = (self.log_density)(x, atom);
        if v.is_nan() || v == T::infinity() {
            return Err(Error::NonPositiveDensity {
                atom,
                value: v.exp().to_f64_lossy(),
            });
        }
        Ok(v)
    }

    /// `p(x) = p̄(x, ·)·μ`.
    pub fn density_at(&self, x: &[T]) -> Result<Measure<T>> {
        self.check_point(x)?;
        let values = (0..self.space().len())
            .map(|j| Ok(self.log_density(x, j)?.exp() * self.reference.values()[j]))
            .collect::<Result<Vec<_>>>()?;
        Measure::new(self.space().clone(), values)
    }

    /// Central difference `[ln p̄(x+hV) − ln p̄(x−hV)]/(2h)` with `h = step·box scale`.
    pub fn finite_difference_score(&self, td: &TangentDirection<T>, step: Option<T>) -> Result<TestFunction<T>> {
        self.check_direction(td)?;
        let h = step.unwrap_or(T::of(DEFAULT_FD_STEP)) * self.domain.scale();
        if !(h > T::zero()) {
            return Err(Error::InvalidParameter(
                "finite-difference step must be positive".into(),
            ));
        }
        let shifted = |sign: T| -> Vec<T> {
            td.point
                .iter()
                .zip(&td.direction)
                .map(|(x, v)| *x + sign * h * *v)
                .collect()
        };
        let (plus, minus) = (shifted(T::one()), shifted(-T::one()));
        if !(self.domain.contains(&plus) && self.domain.contains(&minus)) {
            return Err(Error::OutsideDomain(format!(
                "finite-difference stencil around {:?} leaves the domain",
                td.point
            )));
        }
        let two_h = h + h;
        let values = (0..self.space().len())
            .map(|j| Ok((self.log_density(&plus, j)? - self.log_density(&minus, j)?) / two_h))
            .collect::<Result<Vec<_>>>()?;
        TestFunction::new(self.space().clone(), values, true)
    }

    pub fn analytic_score(&self, td: &TangentDirection<T>) -> Option<Result<TestFunction<T>>> {
        let score = self.analytic_score.as_ref()?;
        Some(self.check_direction(td).and_then(|_| {
            let values = (0..self.space().len())
                .map(|j| score(&td.point, &td.direction, j))
                .collect();
            TestFunction::new(self.space().clone(), values, true)
        }))
    }

    /// `∂_V ln p̄(x, ·)`: analytic when available, central difference otherwise.
    pub fn score(&self, td: &TangentDirection<T>, fd_step: Option<T>) -> Result<TestFunction<T>> {
        match self.analytic_score(td) {
            Some(score) => score,
            None => self.finite_difference_score(td, fd_step),
        }
    }

    /// `‖∂_V ln p̄(x, ·)‖_{Lᵏ(p(x))}`.
    pub fn integrability_norm(&self, td: &TangentDirection<T>, k: T) -> Result<T> {
        let score = self.score(td, None)?;
        lp_norm(&score, &self.density_at(&td.point)?, k)
    }

    /// The same family written over the reference `φμ` with density `p̄/φ`.
    pub fn with_reference(&self, phi: &TestFunction<T>) -> Result<Self> {
        let reference = crate::measure::rescale_reference(&self.reference, phi)?;
        let log_phi: Vec<T> = phi.values().iter().map(|v| v.ln()).collect();
        let inner = Arc::clone(&self.log_density);
        Ok(Self {
            name: format!("{}@rescaled", self.name),
            domain: self.domain.clone(),
            reference,
            log_density: Arc::new(move |x, j| inner(x, j) - log_phi[j]),
            analytic_score: self.analytic_score.clone(),
            statistical: self.statistical,
        })
    }

    /// The image model `(M, Ω₂, κ_*μ, κ_*p)`, whose score is the conditional
    /// expectation `κ_*^{p(x)}` of the source score.
    pub fn pushforward(&self, kappa: &Statistic<T>) -> Result<Self> {
        self.space()
            .ensure_same(kappa.source(), "model space and statistic source")?;
        let reference = pushforward_measure(kappa, &self.reference)?;
        if let Some(y) = reference.values().iter().position(|m| !(*m > T::zero())) {
            return Err(Error::ZeroMassFiber(y));
        }
        let source = self.clone();
        let log_ref: Vec<T> = reference.values().iter().map(|v| v.ln()).collect();
        let fibers: Vec<Vec<usize>> = (0..reference.values().len())
            .map(|y| {
                (0..kappa.source().len())
                    .filter(|&i| kappa.assignment()[i] == y && self.reference.node_mass(i) > T::zero())
                    .collect()
            })
            .collect();
        let log_density: LogDensityFn<T> = Arc::new(move |x, y| {
            let fiber = &fibers[y];
            let terms: Vec<T> = fiber
                .iter()
                .map(|&i| match source.log_density(x, i) {
                    Ok(ld) => ld + source.reference.node_mass(i).ln(),
                    Err(_) => T::nan(),
                })
                .collect();
            if let [_] = terms[..] {
                // Keeps relabelled densities bit-identical.
                let i = fiber[0];
                return source.log_density(x, i).unwrap_or_else(|_| T::nan())
                    + (source.reference.node_mass(i).ln() - log_ref[y]);
            }
            let top = terms.iter().fold(T::neg_infinity(), |m, t| m.max(*t));
            top + crate::scalar::compensated_sum(terms.iter().map(|t| (*t - top).exp())).ln() - log_ref[y]
        });
        let source = self.clone();
        let stat = kappa.clone();
        let score: ScoreFn<T> = Arc::new(move |x, v, y| {
            let td = TangentDirection {
                point: x.to_vec(),
                direction: v.to_vec(),
            };
            let compute = || -> Result<T> {
                let s = source.score(&td, None)?;
                let p = source.density_at(x)?;
                Ok(pushforward_function(&stat, &s, &p)?.function.values()[y])
            };
            compute().unwrap_or_else(|_| T::nan())
        });
        Self::new(
            format!("{}∘κ", self.name),
            self.domain.clone(),
            reference,
            log_density,
            Some(score),
            self.statistical,
        )
    }
}

/// Integrability norms along a parameter path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct IntegrabilityScan<T> {
    pub k: T,
    pub path: Vec<Vec<T>>,
    pub norms: Vec<T>,
    pub max_jump: T,
    /// Largest jump after inserting the midpoint of every path segment.
    pub refined_max_jump: T,
    /// Path point where the refined scan jumps most.
    pub jump_location: Vec<T>,
    pub continuity_plausible: bool,
    pub verdict: String,
}

pub const SCAN_PLAUSIBLE: &str = "continuity plausible at scale";
pub const SCAN_SUSPECTED: &str = "discontinuity suspected";

/// Jumps of a continuous function shrink when the path is refined; the scan
/// calls continuity plausible when the refined maximal jump is at most 3/4
/// of the coarse one.
pub fn integrability_scan<T: Scalar>(
    model: &ParametrizedModel<T>,
    path: &[Vec<T>],
    direction: &[T],
    k: T,
) -> Result<IntegrabilityScan<T>> {
    if path.len() < 2 {
        return Err(Error::InvalidParameter(
            "an integrability scan needs at least two path points".into(),
        ));
    }
    let norm_at = |x: &Vec<T>| model.integrability_norm(&TangentDirection::new(x.clone(), direction.to_vec())?, k);
    let norms = path.iter().map(norm_at).collect::<Result<Vec<_>>>()?;
    let mut refined_path = Vec::with_capacity(2 * path.len() - 1);
    for w in path.windows(2) {
        refined_path.push(w[0].clone());
        refined_path.push(w[0].iter().zip(&w[1]).map(|(a, b)| T::of(0.5) * (*a + *b)).collect());
    }
    refined_path.push(path[path.len() - 1].clone());
    let refined = refined_path.iter().map(norm_at).collect::<Result<Vec<_>>>()?;
    let jumps = |v: &[T]| -> (T, usize) {
        v.windows(2)
            .enumerate()
            .map(|(i, w)| ((w[1] - w[0]).abs(), i))
            .fold((T::zero(), 0), |best, cur| if cur.0 > best.0 { cur } else { best })
    };
    let (max_jump, _) = jumps(&norms);
    let (refined_max_jump, at) = jumps(&refined);
    let scale = norms.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let floor = T::of(1e-12) * scale;
    let continuity_plausible = refined_max_jump <= T::of(0.75) * max_jump + floor;
    Ok(IntegrabilityScan {
        k,
        path: path.to_vec(),
        norms,
        max_jump,
        refined_max_jump,
        jump_location: refined_path[at].clone(),
        continuity_plausible,
        verdict: if continuity_plausible {
            SCAN_PLAUSIBLE
        } else {
            SCAN_SUSPECTED
        }
        .to_string(),
    })
}

/// The mixed point `[∂_V ln p̄(x), p(x)]` measured in `Lᵏ`.
pub fn score_point<T: Scalar>(
    model: &ParametrizedModel<T>,
    td: &TangentDirection<T>,
    k: usize,
) -> Result<MixedPoint<T>> {
    MixedPoint::with_order(vec![model.score(td, None)?], model.density_at(&td.point)?, k)
}

/// Probes continuity of `(x, V) ↦ [∂_V ln p̄(x), p(x)]` into the mixed topology
/// along a sequence of tangent directions.
pub fn regularity_probe<T: Scalar>(
    model: &ParametrizedModel<T>,
    seq: &[TangentDirection<T>],
    limit: &TangentDirection<T>,
    k: usize,
    banks: &ProbeBanks<T>,
    settings: &ProbeSettings<T>,
) -> Result<ConvergenceReport<T>> {
    let points = seq
        .iter()
        .map(|td| score_point(model, td, k))
        .collect::<Result<Vec<_>>>()?;
    converges_mixed(&points, &score_point(model, limit, k)?, banks, settings)
}
