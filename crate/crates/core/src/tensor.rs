//! Covariant n-tensor fields on finite measures, evaluated on mixed points
//! `[f₁, …, f_n, μ]`, and their pullback to parametrized models.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{integrate_map, BaseMeasure, FiniteMeasure, Location, SampleSpace, TestFunction};
use crate::model::{ParametrizedModel, TangentDirection};
use crate::scalar::{compensated_sum, sorted_sum, Scalar};
use crate::topology::{ConvergenceReport, MixedPoint, VERDICT_CONVERGED};

/// A bounded weight `g` on the sample space.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight<T: Scalar> {
    Constant(T),
    /// `coefficient · tᵖ` in the node coordinate `t`.
    Monomial {
        coefficient: T,
        power: i32,
    },
    Function(TestFunction<T>),
}

impl<T: Scalar> Weight<T> {
    pub fn at(&self, space: &SampleSpace<T>, loc: &Location<T>) -> T {
        match self {
            Weight::Constant(c) => *c,
            Weight::Monomial { coefficient, power } => *coefficient * space.coordinate(loc).powi(*power),
            Weight::Function(g) => g.value_at(loc),
        }
    }

    fn check(&self, space: &SampleSpace<T>) -> Result<()> {
        match self {
            Weight::Function(g) => {
                g.space().ensure_same(space, "tensor weight and base measure")?;
                if !g.is_bounded() {
                    return Err(Error::InvalidFunction("tensor weight must be flagged bounded".into()));
                }
                Ok(())
            }
            Weight::Monomial { power, .. } if *power < 0 => match space.bounds() {
                Some((lo, _)) if lo > T::zero() => Ok(()),
                _ => Err(Error::InvalidFunction(
                    "negative powers need a space bounded away from 0".into(),
                )),
            },
            _ => Ok(()),
        }
    }

    /// `sup |g|` over the grid nodes and, on intervals, the endpoints.
    pub fn sup(&self, space: &SampleSpace<T>) -> T {
        let mut locs: Vec<Location<T>> = (0..space.len()).map(Location::Node).collect();
        if let Some((lo, hi)) = space.bounds() {
            locs.push(Location::Point(lo));
            locs.push(Location::Point(hi));
        }
        locs.iter().fold(T::zero(), |m, l| m.max(self.at(space, l).abs()))
    }
}

/// `(mass, [∫hᵢ dμ]) ↦ φ`.
pub type PhiFn<T> = Arc<dyn Fn(T, &[T]) -> T + Send + Sync>;

/// The outer function `φ` of a weakly continuous functional.
#[derive(Clone)]
pub enum Phi<T: Scalar> {
    Constant(T),
    /// `coefficient · mass^power`.
    MassPower {
        coefficient: T,
        power: T,
    },
    Custom(PhiFn<T>),
}

impl<T: Scalar> fmt::Debug for Phi<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phi::Constant(c) => write!(f, "Constant({c})"),
            Phi::MassPower { coefficient, power } => write!(f, "MassPower({coefficient}, {power})"),
            Phi::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// `c(μ) = φ(mass(μ), ∫h₁dμ, …, ∫h_m dμ)`, weakly continuous for continuous `φ`.
#[derive(Debug, Clone)]
pub struct WeakFunctional<T: Scalar> {
    pub phi: Phi<T>,
    pub tests: Vec<Weight<T>>,
}

impl<T: Scalar> WeakFunctional<T> {
    pub fn constant(c: T) -> Self {
        Self {
            phi: Phi::Constant(c),
            tests: Vec::new(),
        }
    }

    pub fn mass_power(coefficient: T, power: T) -> Self {
        Self {
            phi: Phi::MassPower { coefficient, power },
            tests: Vec::new(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.phi, Phi::Constant(_))
    }

    pub fn evaluate<M: FiniteMeasure<T> + ?Sized>(&self, mu: &M) -> Result<T> {
        let support = mu.weighted_support();
        let mass = compensated_sum(support.iter().map(|(_, m)| *m));
        Ok(match &self.phi {
            Phi::Constant(c) => *c,
            Phi::MassPower { coefficient, power } => *coefficient * mass.powf(*power),
            Phi::Custom(f) => {
                let space = mu.space();
                let integrals: Vec<T> = self
                    .tests
                    .iter()
                    .map(|h| compensated_sum(support.iter().map(|(l, m)| h.at(space, l) * *m)))
                    .collect();
                f(mass, &integrals)
            }
        })
    }
}

pub type KernelFn<T> = Arc<dyn Fn(&TestFunction<T>, &BaseMeasure<T>) -> Result<TestFunction<T>> + Send + Sync>;
pub type CustomFn<T> = Arc<dyn Fn(&MixedPoint<T>) -> Result<T> + Send + Sync>;

#[derive(Clone)]
pub enum TensorKind<T: Scalar> {
    /// `c(μ)·∫ g f₁⋯f_n dμ`.
    Tgc {
        g: Weight<T>,
        c: WeakFunctional<T>,
    },
    /// `∫ L(f₁, μ)·f₂ dμ`.
    Kernel(KernelFn<T>),
    Custom(CustomFn<T>),
}

/// A covariant n-tensor field `τ_μ(f₁, …, f_n)`.
#[derive(Clone)]
pub struct CovariantTensorField<T: Scalar> {
    order: usize,
    kind: TensorKind<T>,
    name: String,
}

impl<T: Scalar> fmt::Debug for CovariantTensorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CovariantTensorField")
            .field("name", &self.name)
            .field("order", &self.order)
            .finish()
    }
}

impl<T: Scalar> CovariantTensorField<T> {
    pub fn tgc(order: usize, g: Weight<T>, c: WeakFunctional<T>) -> Result<Self> {
        Self::check_order(order)?;
        Ok(Self {
            order,
            kind: TensorKind::Tgc { g, c },
            name: format!("T_g,c(n={order})"),
        })
    }

    /// `T_{[1],1}`: the Fisher metric for `n = 2`, Amari–Chentsov for `n = 3`.
    pub fn canonical(order: usize) -> Result<Self> {
        let mut t = Self::tgc(order, Weight::Constant(T::one()), WeakFunctional::constant(T::one()))?;
        t.name = format!("T_1,1(n={order})");
        Ok(t)
    }

    pub fn zero(order: usize) -> Result<Self> {
        let mut t = Self::tgc(order, Weight::Constant(T::zero()), WeakFunctional::constant(T::one()))?;
        t.name = format!("zero(n={order})");
        Ok(t)
    }

    pub fn kernel(l: KernelFn<T>) -> Self {
        Self {
            order: 2,
            kind: TensorKind::Kernel(l),
            name: "kernel".into(),
        }
    }

    /// `Σ uᵢ²` written in the density slot: `L(f, μ) = f·(atom masses)`.
    pub fn euclidean() -> Self {
        let mut t = Self::kernel(Arc::new(|f: &TestFunction<T>, mu: &BaseMeasure<T>| match mu {
            BaseMeasure::Grid(m) => {
                let values = f
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| *v * m.node_mass(i))
                    .collect();
                TestFunction::new(f.space().clone(), values, true)
            }
            BaseMeasure::Atomic(_) => Err(Error::InvalidParameter(
                "the Euclidean form is defined on grid measures only".into(),
            )),
        }));
        t.name = "euclidean".into();
        t
    }

    pub fn custom(order: usize, name: impl Into<String>, f: CustomFn<T>) -> Result<Self> {
        Self::check_order(order)?;
        Ok(Self {
            order,
            kind: TensorKind::Custom(f),
            name: name.into(),
        })
    }

    fn check_order(order: usize) -> Result<()> {
        if order == 0 {
            return Err(Error::InvalidParameter("tensor order must be positive".into()));
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> &TensorKind<T> {
        &self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// `τ_μ(f₁, …, f_n)` at a mixed point of matching order.
pub fn evaluate_tensor<T: Scalar>(tensor: &CovariantTensorField<T>, point: &MixedPoint<T>) -> Result<T> {
    let n = tensor.order();
    if point.order() != n || point.functions().len() != n {
        return Err(Error::OrderMismatch {
            expected: n,
            found: point.functions().len(),
        });
    }
    let base = point.base();
    let fs: Vec<&TestFunction<T>> = point.functions().iter().collect();
    match tensor.kind() {
        TensorKind::Tgc { g, c } => {
            let space = base.space();
            g.check(space)?;
            let scale = c.evaluate(base)?;
            let support = base.weighted_support();
            let terms = support.into_iter().map(|(loc, mass)| {
                let product = fs.iter().fold(T::one(), |acc, f| acc * f.value_at(&loc));
                g.at(space, &loc) * product * mass
            });
            Ok(scale * compensated_sum(terms))
        }
        TensorKind::Kernel(l) => {
            let lf = l(fs[0], base)?;
            integrate_map(base, &[&lf, fs[1]], |v| v[0] * v[1])
        }
        TensorKind::Custom(f) => f(point),
    }
}

fn scores<T: Scalar>(model: &ParametrizedModel<T>, x: &[T], dirs: &[&[T]]) -> Result<Vec<TestFunction<T>>> {
    dirs.iter()
        .map(|v| model.score(&TangentDirection::new(x.to_vec(), v.to_vec())?, None))
        .collect()
}

/// `∫ ∂_V ln p̄ · ∂_W ln p̄ dp(x)`.
pub fn fisher<T: Scalar>(model: &ParametrizedModel<T>, x: &[T], v: &[T], w: &[T]) -> Result<T> {
    let s = scores(model, x, &[v, w])?;
    let p = model.density_at(x)?;
    let (a, b) = (s[0].values(), s[1].values());
    Ok(sorted_sum(
        (0..a.len()).map(|j| p.node_mass(j) * (a[j] * b[j])).collect(),
    ))
}

/// `∫ ∂_V ln p̄ · ∂_W ln p̄ · ∂_X ln p̄ dp(x)`.
pub fn amari_chentsov<T: Scalar>(model: &ParametrizedModel<T>, x: &[T], v: &[T], w: &[T], u: &[T]) -> Result<T> {
    let s = scores(model, x, &[v, w, u])?;
    let p = model.density_at(x)?;
    let (a, b, c) = (s[0].values(), s[1].values(), s[2].values());
    Ok(sorted_sum(
        (0..a.len()).map(|j| p.node_mass(j) * (a[j] * b[j] * c[j])).collect(),
    ))
}

/// `τ_{p(x)}(∂_{V₁} ln p̄, …, ∂_{V_n} ln p̄)`.
pub fn pullback<T: Scalar>(
    tensor: &CovariantTensorField<T>,
    model: &ParametrizedModel<T>,
    x: &[T],
    directions: &[Vec<T>],
) -> Result<T> {
    if directions.len() != tensor.order() {
        return Err(Error::OrderMismatch {
            expected: tensor.order(),
            found: directions.len(),
        });
    }
    let dirs: Vec<&[T]> = directions.iter().map(|d| d.as_slice()).collect();
    let point = MixedPoint::new(scores(model, x, &dirs)?, model.density_at(x)?)?;
    evaluate_tensor(tensor, &point)
}

/// Tensor values along a probe sequence compared with the limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct StrongContinuityReport<T> {
    pub values: Vec<T>,
    pub limit_value: T,
    pub max_tail_deviation: T,
    /// Per schedule level: `sup_{m ≥ entry} |τ(seq_m) − τ(limit)|`.
    pub level_deviation: Vec<T>,
    /// Per schedule level: `modulus · eps`.
    pub level_bound: Vec<T>,
    pub within: Vec<bool>,
    pub modulus: T,
    pub holds: bool,
}

/// `(n + 1)·max(1, |c(μ)|·sup|g|)·max(1, R)ⁿ` with `R` the largest `Lⁿ(μ)`
/// norm among the limit functions; the multilinear Lipschitz constant of a
/// `T_{g,c}` near the limit, one unit per slot.
pub fn default_modulus<T: Scalar>(tensor: &CovariantTensorField<T>, limit: &MixedPoint<T>) -> Result<T> {
    let n = tensor.order();
    let space = limit.base().space();
    let amplitude = match tensor.kind() {
        TensorKind::Tgc { g, c } => c.evaluate(limit.base())?.abs() * g.sup(space),
        _ => T::one(),
    };
    let radius = limit
        .functions()
        .iter()
        .map(|f| crate::measure::lp_norm(f, limit.base(), T::of_usize(n)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(T::one(), |m, r| m.max(r));
    Ok(T::of_usize(n + 1) * amplitude.max(T::one()) * radius.powi(n as i32))
}

/// Evaluates `τ` along a sequence that a mixed-topology probe reported as
/// converged and checks the tail deviation at each level against
/// `modulus · eps`.
pub fn strong_continuity_probe<T: Scalar>(
    tensor: &CovariantTensorField<T>,
    seq: &[MixedPoint<T>],
    limit: &MixedPoint<T>,
    report: &ConvergenceReport<T>,
    modulus: Option<T>,
) -> Result<StrongContinuityReport<T>> {
    if !report.converged || report.verdict != VERDICT_CONVERGED || report.sequence_len != seq.len() {
        return Err(Error::Precondition(
            "strong continuity is probed only along sequences reported converged".into(),
        ));
    }
    let values = seq
        .iter()
        .map(|p| evaluate_tensor(tensor, p))
        .collect::<Result<Vec<_>>>()?;
    let limit_value = evaluate_tensor(tensor, limit)?;
    let modulus = match modulus {
        Some(m) => m,
        None => default_modulus(tensor, limit)?,
    };
    let deviations: Vec<T> = values.iter().map(|v| (*v - limit_value).abs()).collect();
    let mut level_deviation = Vec::new();
    let mut level_bound = Vec::new();
    let mut within = Vec::new();
    for level in &report.levels {
        let start = level.entry_index.unwrap_or(seq.len());
        let dev = deviations[start..].iter().fold(T::zero(), |m, d| m.max(*d));
        let bound = modulus * level.eps;
        level_deviation.push(dev);
        level_bound.push(bound);
        within.push(dev <= bound);
    }
    let max_tail_deviation = level_deviation.last().copied().unwrap_or(T::zero());
    Ok(StrongContinuityReport {
        values,
        limit_value,
        max_tail_deviation,
        holds: within.iter().all(|w| *w),
        level_deviation,
        level_bound,
        within,
        modulus,
    })
}
