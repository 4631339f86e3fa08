//! Checks of the invariance properties of the Fisher metric and its relatives:
//! monotonicity under statistics, sufficiency, the Amari–Chentsov chain,
//! invariance under congruent embeddings, the finite-to-continuum limit and
//! independence of the reference measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{dirac_approximate, lp_norm, CellPartition, Measure, SampleSpace, StepFunction, TestFunction};
use crate::model::{ParametrizedModel, TangentDirection};
use crate::scalar::{compensated_sum, Scalar};
use crate::statistic::{pushforward_function, pushforward_measure, Statistic};
use crate::tensor::{amari_chentsov, evaluate_tensor, fisher, CovariantTensorField};
use crate::topology::MixedPoint;

/// Tolerance on conditional weights summing to one.
pub const SPLIT_TOLERANCE: f64 = 1e-12;

/// A Markov embedding of `n` atoms into `m`: atom `i` is spread over the
/// disjoint block `splits[i]` with conditional weights `q_{ij}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct CongruentEmbedding<T> {
    source_len: usize,
    target_len: usize,
    splits: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> CongruentEmbedding<T> {
    pub fn new(target_len: usize, splits: Vec<Vec<(usize, T)>>) -> Result<Self> {
        if splits.is_empty() {
            return Err(Error::InvalidEmbedding(
                "embedding needs at least one source atom".into(),
            ));
        }
        let mut owner = vec![None; target_len];
        for (i, block) in splits.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidEmbedding(format!("source atom {i} has an empty block")));
            }
            for &(j, q) in block {
                if j >= target_len {
                    return Err(Error::InvalidEmbedding(format!("target atom {j} out of range")));
                }
                if !(q > T::zero()) || !q.is_finite() {
                    return Err(Error::InvalidEmbedding(format!(
                        "weight {q} of atom {i} must be positive"
                    )));
                }
                if owner[j].replace(i).is_some() {
                    return Err(Error::InvalidEmbedding(format!("target atom {j} lies in two blocks")));
                }
            }
            let total = compensated_sum(block.iter().map(|(_, q)| *q));
            if (total - T::one()).abs() > T::of(SPLIT_TOLERANCE) {
                return Err(Error::InvalidEmbedding(format!("weights of atom {i} sum to {total}")));
            }
        }
        Ok(Self {
            source_len: splits.len(),
            target_len,
            splits,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| vec![(i, T::one())]).collect())
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn splits(&self) -> &[Vec<(usize, T)>] {
        &self.splits
    }

    /// `K_*u = Σᵢ uᵢ·qᵢ` for a signed vector on the source atoms.
    pub fn push(&self, u: &[T]) -> Result<Vec<T>> {
        if u.len() != self.source_len {
            return Err(Error::InvalidEmbedding(format!(
                "vector has {} entries, embedding source has {}",
                u.len(),
                self.source_len
            )));
        }
        let mut out = vec![T::zero(); self.target_len];
        for (ui, block) in u.iter().zip(&self.splits) {
            for &(j, q) in block {
                out[j] = *ui * q;
            }
        }
        Ok(out)
    }

    /// The statistic merging each block back to its source atom; needs the
    /// blocks to cover every target atom.
    pub fn merging_statistic(&self, source: &SampleSpace<T>, target: &SampleSpace<T>) -> Result<Statistic<T>> {
        let mut table = vec![usize::MAX; self.target_len];
        for (i, block) in self.splits.iter().enumerate() {
            for &(j, _) in block {
                table[j] = i;
            }
        }
        if table.contains(&usize::MAX) {
            return Err(Error::InvalidEmbedding("blocks do not cover the target".into()));
        }
        Statistic::from_table(target.clone(), source.clone(), table)
    }
}

/// Information before and after applying a statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct LossReport<T> {
    pub before: T,
    pub after: T,
    pub loss: T,
    pub context: String,
}

impl<T: Scalar> LossReport<T> {
    pub fn new(before: T, after: T, context: String) -> Self {
        Self {
            before,
            after,
            loss: before - after,
            context,
        }
    }
}

fn context<T: Scalar>(model: &ParametrizedModel<T>, x: &[T], v: &[T]) -> String {
    format!("model={} x={x:?} V={v:?}", model.name())
}

/// `g(V, V)` of the model against `g(V, V)` of its image under `κ`.
pub fn monotonicity_check<T: Scalar>(
    model: &ParametrizedModel<T>,
    kappa: &Statistic<T>,
    x: &[T],
    v: &[T],
) -> Result<LossReport<T>> {
    let image = model.pushforward(kappa)?;
    let before = fisher(model, x, v, v)?;
    let after = fisher(&image, x, v, v)?;
    Ok(LossReport::new(before, after, context(model, x, v)))
}

/// Monotonicity reports over a grid of points and directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct SufficiencyReport<T> {
    pub max_abs_loss: T,
    pub reports: Vec<LossReport<T>>,
}

/// `max |loss|` over `xs × vs`; zero for a sufficient statistic.
pub fn sufficiency_check<T: Scalar>(
    model: &ParametrizedModel<T>,
    kappa: &Statistic<T>,
    xs: &[Vec<T>],
    vs: &[Vec<T>],
) -> Result<SufficiencyReport<T>> {
    let image = model.pushforward(kappa)?;
    let mut reports = Vec::with_capacity(xs.len() * vs.len());
    for x in xs {
        for v in vs {
            let before = fisher(model, x, v, v)?;
            let after = fisher(&image, x, v, v)?;
            reports.push(LossReport::new(before, after, context(model, x, v)));
        }
    }
    let max_abs_loss = reports.iter().fold(T::zero(), |m, r| m.max(r.loss.abs()));
    Ok(SufficiencyReport { max_abs_loss, reports })
}

/// Amari–Chentsov values around a statistic with the `L³` chain
/// `|T_after| ≤ ‖κ_*s‖³_{L³} ≤ ‖s‖³_{L³}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct AcChainReport<T> {
    pub ac_before: T,
    pub ac_after: T,
    /// `‖∂_V ln p̄‖_{L³(p(x))}`.
    pub l3_before: T,
    /// `‖κ_*^{p(x)} ∂_V ln p̄‖_{L³(κ_*p(x))}`.
    pub l3_after: T,
    /// `|T_after| ≤ l3_after³ + 1e−10`.
    pub after_bounded: bool,
    /// `l3_after ≤ l3_before + 1e−12`.
    pub contraction: bool,
    /// Reported only: `|T_after| ≤ |T_before|`.
    pub abs_decreases: bool,
    pub context: String,
}

impl<T: Scalar> AcChainReport<T> {
    pub fn chain_holds(&self) -> bool {
        self.after_bounded && self.contraction
    }
}

pub fn ac_monotonicity_probe<T: Scalar>(
    model: &ParametrizedModel<T>,
    kappa: &Statistic<T>,
    x: &[T],
    v: &[T],
) -> Result<AcChainReport<T>> {
    let image = model.pushforward(kappa)?;
    let ac_before = amari_chentsov(model, x, v, v, v)?;
    let ac_after = amari_chentsov(&image, x, v, v, v)?;
    let td = TangentDirection::new(x.to_vec(), v.to_vec())?;
    let score = model.score(&td, None)?;
    let p = model.density_at(x)?;
    let three = T::of(3.0);
    let l3_before = lp_norm(&score, &p, three)?;
    let pushed = pushforward_function(kappa, &score, &p)?.function;
    let l3_after = lp_norm(&pushed, &pushforward_measure(kappa, &p)?, three)?;
    Ok(AcChainReport {
        ac_before,
        ac_after,
        l3_before,
        l3_after,
        after_bounded: ac_after.abs() <= l3_after.powi(3) + T::of(1e-10),
        contraction: l3_after <= l3_before + T::of(1e-12),
        abs_decreases: ac_after.abs() <= ac_before.abs(),
        context: context(model, x, v),
    })
}

fn simplex_point<T: Scalar>(space: &SampleSpace<T>, masses: &[T], u: &[T]) -> Result<MixedPoint<T>> {
    let mu = Measure::new(space.clone(), masses.to_vec())?;
    let f: Vec<T> = masses
        .iter()
        .zip(u)
        .map(|(m, u)| if *m > T::zero() { *u / *m } else { T::zero() })
        .collect();
    let f = TestFunction::new(space.clone(), f, true)?;
    MixedPoint::new(vec![f.clone(), f], mu)
}

/// `form_{K_*μ}(K_*u, K_*u) − form_μ(u, u)` with the tangent vector `u`
/// entered through its density `u/μ`.
pub fn chentsov_invariance_residual<T: Scalar>(
    form: &CovariantTensorField<T>,
    embedding: &CongruentEmbedding<T>,
    mu: &Measure<T>,
    u: &[T],
) -> Result<T> {
    if form.order() != 2 {
        return Err(Error::OrderMismatch {
            expected: 2,
            found: form.order(),
        });
    }
    if !mu.space().is_discrete() || mu.space().len() != embedding.source_len() {
        return Err(Error::InvalidEmbedding(
            "measure must live on the embedding's source atoms".into(),
        ));
    }
    let masses = mu.node_masses();
    if masses.iter().any(|m| !(*m > T::zero())) {
        return Err(Error::InvalidMeasure(
            "Chentsov residuals need a strictly positive measure".into(),
        ));
    }
    let source = SampleSpace::indexed(embedding.source_len())?;
    let target = SampleSpace::indexed(embedding.target_len())?;
    let before = evaluate_tensor(form, &simplex_point(&source, &masses, u)?)?;
    let after = evaluate_tensor(
        form,
        &simplex_point(&target, &embedding.push(&masses)?, &embedding.push(u)?)?,
    )?;
    Ok(after - before)
}

pub const UNIQUENESS_TOLERANCE: f64 = 1e-3;

/// Tensor values along Dirac refinements of a continuum measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct UniquenessReport<T> {
    pub cells: Vec<usize>,
    pub values: Vec<T>,
    /// `∫ f² dμ`.
    pub fisher_reference: T,
    /// `τ_μ(f, f)` evaluated on the continuum grid.
    pub continuum_value: T,
    pub tolerance: T,
    /// Final level within `tolerance` of `continuum_value`.
    pub converged: bool,
    /// Final level within `tolerance` of `fisher_reference`.
    pub agrees_with_fisher: bool,
    /// `|value − continuum_value|` non-increasing along the levels.
    pub monotone: bool,
}

/// Evaluates `τ` at `[f, f, ν_ℓ]` for the Dirac combinations `ν_ℓ` that
/// reproduce the cell averages of `f` on each partition.
pub fn uniqueness_limit_probe<T: Scalar>(
    form: &CovariantTensorField<T>,
    mu: &Measure<T>,
    f: &TestFunction<T>,
    partitions: &[CellPartition<T>],
    tolerance: Option<T>,
) -> Result<UniquenessReport<T>> {
    if form.order() != 2 {
        return Err(Error::OrderMismatch {
            expected: 2,
            found: form.order(),
        });
    }
    if partitions.is_empty() {
        return Err(Error::InvalidParameter(
            "the limiting procedure needs at least one partition".into(),
        ));
    }
    if let Some(i) = partitions.windows(2).position(|w| !w[0].strictly_refined_by(&w[1])) {
        return Err(Error::InvalidParameter(format!(
            "partition {} does not strictly refine {i}",
            i + 1
        )));
    }
    let tolerance = tolerance.unwrap_or(T::of(UNIQUENESS_TOLERANCE));
    let mut values = Vec::with_capacity(partitions.len());
    for partition in partitions {
        let step = StepFunction::cell_average(partition.clone(), f, mu)?;
        let nu = dirac_approximate(mu, std::slice::from_ref(&step))?;
        values.push(evaluate_tensor(
            form,
            &MixedPoint::new(vec![f.clone(), f.clone()], nu)?,
        )?);
    }
    let fisher_reference = crate::measure::integrate_map(mu, &[f], |v| v[0] * v[0])?;
    let continuum_value = evaluate_tensor(form, &MixedPoint::new(vec![f.clone(), f.clone()], mu.clone())?)?;
    let last = *values.last().expect("non-empty");
    let slack = T::of(1e-14) * continuum_value.abs().max(T::one());
    let monotone = values
        .windows(2)
        .all(|w| (w[1] - continuum_value).abs() <= (w[0] - continuum_value).abs() + slack);
    Ok(UniquenessReport {
        cells: partitions.iter().map(|p| p.cell_count()).collect(),
        converged: (last - continuum_value).abs() <= tolerance,
        agrees_with_fisher: (last - fisher_reference).abs() <= tolerance,
        values,
        fisher_reference,
        continuum_value,
        tolerance,
        monotone,
    })
}

/// Dyadic partitions of an interval space into `1, 2, 4, …, 2^levels` cells.
pub fn dyadic_partitions<T: Scalar>(space: &SampleSpace<T>, levels: u32) -> Result<Vec<CellPartition<T>>> {
    (0..=levels)
        .map(|l| CellPartition::uniform(space, 1usize << l))
        .collect()
}

/// Largest Fisher and Amari–Chentsov deviations after rewriting the model
/// over the reference `φμ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ReferenceIndependenceReport<T> {
    pub fisher_deviation: T,
    pub ac_deviation: T,
    pub evaluations: usize,
}

impl<T: Scalar> ReferenceIndependenceReport<T> {
    pub fn max_deviation(&self) -> T {
        self.fisher_deviation.max(self.ac_deviation)
    }
}

pub fn reference_independence_check<T: Scalar>(
    model: &ParametrizedModel<T>,
    phi: &TestFunction<T>,
    xs: &[Vec<T>],
    vs: &[Vec<T>],
) -> Result<ReferenceIndependenceReport<T>> {
    if phi.values().iter().any(|v| !(*v > T::zero())) {
        return Err(Error::InvalidFunction(
            "reference rescaling must be strictly positive".into(),
        ));
    }
    let rebuilt = model.with_reference(phi)?;
    let mut fisher_deviation = T::zero();
    let mut ac_deviation = T::zero();
    for x in xs {
        for v in vs {
            fisher_deviation = fisher_deviation.max((fisher(model, x, v, v)? - fisher(&rebuilt, x, v, v)?).abs());
            ac_deviation =
                ac_deviation.max((amari_chentsov(model, x, v, v, v)? - amari_chentsov(&rebuilt, x, v, v, v)?).abs());
        }
    }
    Ok(ReferenceIndependenceReport {
        fisher_deviation,
        ac_deviation,
        evaluations: xs.len() * vs.len(),
    })
}
