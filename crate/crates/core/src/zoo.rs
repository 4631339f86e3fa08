//! Ready-made parametrized measure models.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{Measure, SampleSpace, TestFunction};
use crate::model::{LogDensityFn, ParamBox, ParametrizedModel, ScoreFn};
use crate::scalar::Scalar;
use crate::statistic::Statistic;

/// Heavy-tail model grid: log-graded on `(0, 1)` down to this cutoff.
pub const HEAVY_TAIL_CUTOFF: f64 = 1e-18;
pub const HEAVY_TAIL_PANELS: usize = 64;
pub const HEAVY_TAIL_ORDER: usize = 8;

/// Bernoulli family `p(x) = (1 − x, x)` on `{0, 1}`, `x ∈ (0, 1)`.
pub fn bernoulli<T: Scalar>() -> Result<ParametrizedModel<T>> {
    let space = SampleSpace::discrete(["0", "1"])?;
    let log_density: LogDensityFn<T> = Arc::new(|x, j| if j == 0 { (T::one() - x[0]).ln() } else { x[0].ln() });
    let score: ScoreFn<T> = Arc::new(|x, v, j| if j == 0 { -v[0] / (T::one() - x[0]) } else { v[0] / x[0] });
    ParametrizedModel::new(
        "bernoulli",
        ParamBox::interval(T::zero(), T::one())?,
        Measure::reference(&space),
        log_density,
        Some(score),
        true,
    )
}

fn log_partition<T: Scalar>(x: &[T]) -> T {
    let top = x.iter().fold(T::zero(), |m, v| m.max(*v));
    let sum = crate::scalar::compensated_sum(x.iter().map(|v| (*v - top).exp())) + (-top).exp();
    top + sum.ln()
}

fn softmax<T: Scalar>(x: &[T]) -> Vec<T> {
    let z = log_partition(x);
    x.iter()
        .map(|v| (*v - z).exp())
        .chain(std::iter::once((-z).exp()))
        .collect()
}

/// Categorical family on `n` atoms in softmax coordinates:
/// `p_i(x) = e^{x_i}/Z(x)` with `x ∈ ℝ^{n−1}` and `x_n = 0`.
pub fn categorical<T: Scalar>(n: usize) -> Result<ParametrizedModel<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "a categorical model needs at least two atoms".into(),
        ));
    }
    let space = SampleSpace::indexed(n)?;
    let last = n - 1;
    let log_density: LogDensityFn<T> = Arc::new(move |x, j| {
        let xj = if j == last { T::zero() } else { x[j] };
        xj - log_partition(x)
    });
    let score: ScoreFn<T> = Arc::new(move |x, v, j| {
        let p = softmax(x);
        let mean = crate::scalar::compensated_sum(p.iter().zip(v).map(|(p, v)| *p * *v));
        let vj = if j == last { T::zero() } else { v[j] };
        vj - mean
    });
    ParametrizedModel::new(
        format!("categorical{n}"),
        ParamBox::unbounded(n - 1),
        Measure::reference(&space),
        log_density,
        Some(score),
        true,
    )
}

/// Softmax coordinates of a strictly positive probability vector.
pub fn categorical_coordinates<T: Scalar>(p: &[T]) -> Result<Vec<T>> {
    if p.len() < 2 || p.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::InvalidParameter(
            "categorical coordinates need a positive vector of length ≥ 2".into(),
        ));
    }
    let last = p[p.len() - 1];
    Ok(p[..p.len() - 1].iter().map(|v| (*v / last).ln()).collect())
}

/// Coordinate direction `V` whose score at `p` is `u/p` for a tangent vector
/// `u` with `Σ u = 0`, so that the Fisher metric reads `Σ u_i w_i / p_i`.
pub fn categorical_direction<T: Scalar>(p: &[T], u: &[T]) -> Result<Vec<T>> {
    if p.len() != u.len() || p.len() < 2 {
        return Err(Error::InvalidParameter(
            "probability and tangent vectors differ in length".into(),
        ));
    }
    let n = p.len() - 1;
    Ok((0..n).map(|i| u[i] / p[i] - u[n] / p[n]).collect())
}

/// Product family `p(x)(y, z) = q(x)(y)·r(z)` together with the projection
/// `(y, z) ↦ y`, a sufficient statistic.
#[derive(Debug, Clone)]
pub struct Factorized<T: Scalar> {
    pub model: ParametrizedModel<T>,
    pub projection: Statistic<T>,
}

fn product_space<T: Scalar>(left: &SampleSpace<T>, right: usize) -> Result<SampleSpace<T>> {
    let ys: Vec<String> = match left.labels() {
        Some(labels) => labels.to_vec(),
        None => return Err(Error::InvalidSpace("product models need a discrete factor".into())),
    };
    SampleSpace::discrete(ys.iter().flat_map(|y| (0..right).map(move |z| format!("{y},{z}"))))
}

fn check_weights<T: Scalar>(r: &[T]) -> Result<()> {
    if r.is_empty() || r.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "factor weights must be positive and finite".into(),
        ));
    }
    Ok(())
}

fn projection<T: Scalar>(product: &SampleSpace<T>, left: &SampleSpace<T>, right: usize) -> Result<Statistic<T>> {
    Statistic::from_table(
        product.clone(),
        left.clone(),
        (0..product.len()).map(|i| i / right).collect(),
    )
}

fn product_reference<T: Scalar>(
    q: &ParametrizedModel<T>,
    product: &SampleSpace<T>,
    right: usize,
) -> Result<Measure<T>> {
    let values = (0..product.len()).map(|i| q.reference().node_mass(i / right)).collect();
    Measure::new(product.clone(), values)
}

/// `q ⊗ r` for a discrete model `q` and fixed positive weights `r`.
pub fn factorized<T: Scalar>(q: &ParametrizedModel<T>, r: Vec<T>) -> Result<Factorized<T>> {
    check_weights(&r)?;
    let m = r.len();
    let product = product_space(q.space(), m)?;
    let statistical =
        q.is_statistical() && (crate::scalar::compensated_sum(r.iter().copied()) - T::one()).abs() <= T::of(1e-12);
    let inner = q.clone();
    let log_r: Vec<T> = r.iter().map(|v| v.ln()).collect();
    let log_density: LogDensityFn<T> =
        Arc::new(move |x, i| inner.log_density(x, i / m).unwrap_or_else(|_| T::nan()) + log_r[i % m]);
    let inner = q.clone();
    let score: ScoreFn<T> = Arc::new(move |x, v, i| {
        let td = crate::model::TangentDirection {
            point: x.to_vec(),
            direction: v.to_vec(),
        };
        inner
            .score(&td, None)
            .map(|s| s.values()[i / m])
            .unwrap_or_else(|_| T::nan())
    });
    let model = ParametrizedModel::new(
        format!("{}⊗r", q.name()),
        q.domain().clone(),
        product_reference(q, &product, m)?,
        log_density,
        Some(score),
        statistical,
    )?;
    Ok(Factorized {
        projection: projection(&product, q.space(), m)?,
        model,
    })
}

/// `p(x)(y, z) = q(x)(y)·r_z·exp(s·x₀·c_z)` with centred index `c_z`; the
/// projection to `y` discards parameter information whenever `s ≠ 0`.
pub fn entangled<T: Scalar>(q: &ParametrizedModel<T>, r: Vec<T>, strength: T) -> Result<Factorized<T>> {
    check_weights(&r)?;
    let m = r.len();
    let product = product_space(q.space(), m)?;
    let centre = T::of_usize(m - 1) * T::of(0.5);
    let inner = q.clone();
    let log_r: Vec<T> = r.iter().map(|v| v.ln()).collect();
    let log_density: LogDensityFn<T> = Arc::new(move |x, i| {
        let cz = T::of_usize(i % m) - centre;
        inner.log_density(x, i / m).unwrap_or_else(|_| T::nan()) + log_r[i % m] + strength * x[0] * cz
    });
    let inner = q.clone();
    let score: ScoreFn<T> = Arc::new(move |x, v, i| {
        let td = crate::model::TangentDirection {
            point: x.to_vec(),
            direction: v.to_vec(),
        };
        let cz = T::of_usize(i % m) - centre;
        inner
            .score(&td, None)
            .map(|s| s.values()[i / m] + strength * v[0] * cz)
            .unwrap_or_else(|_| T::nan())
    });
    let model = ParametrizedModel::new(
        format!("{}⊗r(s={strength})", q.name()),
        q.domain().clone(),
        product_reference(q, &product, m)?,
        log_density,
        Some(score),
        false,
    )?;
    Ok(Factorized {
        projection: projection(&product, q.space(), m)?,
        model,
    })
}

/// Heavy-tail family on `(0, 1)`: `p̄(x, t) = exp(−x²/t^{1/k})`, `x ∈ ℝ`.
///
/// Its score `−2x V t^{−1/k}` lies in `Lᵏ(p(x))` for every `x ≠ 0`, with
/// `‖·‖ᵏ = k(2|x|)ᵏ E₁(x²)` for `V = 1`, which diverges as `x → 0`.
pub fn heavy_tail<T: Scalar>(k: T) -> Result<ParametrizedModel<T>> {
    let space = SampleSpace::log_graded_grid(
        T::zero(),
        T::of(HEAVY_TAIL_CUTOFF),
        T::one(),
        HEAVY_TAIL_PANELS,
        HEAVY_TAIL_ORDER,
    )?;
    heavy_tail_on(k, space)
}

/// [`heavy_tail`] on a caller-supplied grid of `(0, 1)`.
pub fn heavy_tail_on<T: Scalar>(k: T, space: SampleSpace<T>) -> Result<ParametrizedModel<T>> {
    if !(k > T::zero()) {
        return Err(Error::InvalidParameter("heavy-tail exponent must be positive".into()));
    }
    match space.bounds() {
        Some((lo, hi)) if lo >= T::zero() && hi <= T::one() => {}
        _ => return Err(Error::InvalidSpace("heavy-tail model lives on a grid of (0, 1)".into())),
    }
    let inv_k = k.recip();
    let t_pow: Vec<T> = (0..space.len())
        .map(|i| space.node_coordinate(i).powf(-inv_k))
        .collect();
    let t_pow_score = t_pow.clone();
    let log_density: LogDensityFn<T> = Arc::new(move |x, j| -x[0] * x[0] * t_pow[j]);
    let score: ScoreFn<T> = Arc::new(move |x, v, j| -T::of(2.0) * x[0] * v[0] * t_pow_score[j]);
    ParametrizedModel::new(
        format!("heavy_tail(k={k})"),
        ParamBox::unbounded(1),
        Measure::reference(&space),
        log_density,
        Some(score),
        false,
    )
}

/// Laplace location family `p̄(θ, t) = e^{−|t−θ|}` on a uniform grid covering
/// `[θ_min − 10, θ_max + 10]`; `θ ∈ (θ_min, θ_max)`.
pub fn laplace<T: Scalar>(theta_min: T, theta_max: T, nodes: usize) -> Result<ParametrizedModel<T>> {
    let pad = T::of(10.0);
    let space = SampleSpace::uniform_grid(theta_min - pad, theta_max + pad, nodes)?;
    let coords: Vec<T> = (0..space.len()).map(|i| space.node_coordinate(i)).collect();
    let coords_score = coords.clone();
    let log_density: LogDensityFn<T> = Arc::new(move |x, j| -(coords[j] - x[0]).abs());
    let score: ScoreFn<T> = Arc::new(move |x, v, j| {
        let d = coords_score[j] - x[0];
        if d > T::zero() {
            v[0]
        } else if d < T::zero() {
            -v[0]
        } else {
            T::zero()
        }
    });
    ParametrizedModel::new(
        "laplace",
        ParamBox::interval(theta_min, theta_max)?,
        Measure::reference(&space),
        log_density,
        Some(score),
        false,
    )
}

/// One-parameter exponential family `p̄(x, ω) = exp(x·T(ω) − ψ(x))` over a
/// reference measure `μ`, with `ψ(x) = ln ∫ e^{xT} dμ`.
pub fn exponential_family<T: Scalar>(
    reference: Measure<T>,
    statistic: TestFunction<T>,
) -> Result<ParametrizedModel<T>> {
    reference
        .space()
        .ensure_same(statistic.space(), "reference and sufficient statistic")?;
    let masses = reference.node_masses();
    let tv = statistic.values().to_vec();
    let charged: Vec<usize> = (0..masses.len()).filter(|&i| masses[i] > T::zero()).collect();
    let psi = {
        let masses = masses.clone();
        let tv = tv.clone();
        let charged = charged.clone();
        move |x: T| -> T {
            let top = charged.iter().fold(T::neg_infinity(), |m, &i| m.max(x * tv[i]));
            top + crate::scalar::compensated_sum(charged.iter().map(|&i| masses[i] * (x * tv[i] - top).exp())).ln()
        }
    };
    let psi_score = psi.clone();
    let tv_density = tv.clone();
    let log_density: LogDensityFn<T> = Arc::new(move |x, j| x[0] * tv_density[j] - psi(x[0]));
    let score: ScoreFn<T> = Arc::new(move |x, v, j| {
        let lp = psi_score(x[0]);
        let mean =
            crate::scalar::compensated_sum(charged.iter().map(|&i| tv[i] * masses[i] * (x[0] * tv[i] - lp).exp()));
        v[0] * (tv[j] - mean)
    });
    ParametrizedModel::new(
        "exponential_family",
        ParamBox::unbounded(1),
        reference,
        log_density,
        Some(score),
        true,
    )
}
