//! Finitely checkable pieces of the mixed topology on pairs
//! `[f₁, …, f_n, μ]` of functions and a base measure.
//!
//! Convergence here is always relative to a finite approximant and a finite
//! bank of test functions: a sequence "converges at test scale" when, for
//! each tolerance of the schedule, its tail eventually stays inside the basic
//! neighbourhood centred at the approximant with weak part given by the bank.
//! This under-approximates convergence in the full topology, which would
//! quantify over every bounded continuous centre and test function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{integrate, lp_distance, lp_norm, BaseMeasure, FiniteMeasure, TestFunction};
use crate::scalar::Scalar;
use crate::statistic::{pushforward_function, pushforward_measure, Statistic};

/// A point `[f₁, …, f_m, μ]` with the `Lⁿ(μ)` exponent used to measure it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct MixedPoint<T: Scalar> {
    functions: Vec<TestFunction<T>>,
    base: BaseMeasure<T>,
    order: usize,
}

impl<T: Scalar> MixedPoint<T> {
    /// A point of the `n`-fold fiber space, `n` = number of functions.
    pub fn new(functions: Vec<TestFunction<T>>, base: impl Into<BaseMeasure<T>>) -> Result<Self> {
        let order = functions.len();
        Self::with_order(functions, base, order)
    }

    /// A point whose functions are measured in `L^order(base)`.
    pub fn with_order(functions: Vec<TestFunction<T>>, base: impl Into<BaseMeasure<T>>, order: usize) -> Result<Self> {
        let base = base.into();
        if order == 0 || functions.is_empty() {
            return Err(Error::InvalidParameter(
                "a mixed point needs at least one function and a positive order".into(),
            ));
        }
        for f in &functions {
            f.space()
                .ensure_same(base.space(), "mixed point functions and base measure")?;
            let norm = lp_norm(f, &base, T::of_usize(order))?;
            if !norm.is_finite() {
                return Err(Error::InvalidFunction("function has infinite Lⁿ norm".into()));
            }
        }
        Ok(Self { functions, base, order })
    }

    pub fn functions(&self) -> &[TestFunction<T>] {
        &self.functions
    }

    pub fn base(&self) -> &BaseMeasure<T> {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `Σᵢ ‖gᵢ − fᵢ‖_{Lⁿ(base)}` against centre functions `f`.
    pub fn distance_to(&self, centre: &[TestFunction<T>]) -> Result<T> {
        if centre.len() != self.functions.len() {
            return Err(Error::OrderMismatch {
                expected: centre.len(),
                found: self.functions.len(),
            });
        }
        let n = T::of_usize(self.order);
        let mut total = T::zero();
        for (g, f) in self.functions.iter().zip(centre) {
            total += lp_distance(g, f, &self.base, n)?;
        }
        Ok(total)
    }
}

/// The weak neighbourhood `{ν : |∫fᵢdμ − ∫fᵢdν| < ε}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct WeakNeighborhood<T: Scalar> {
    pub center: BaseMeasure<T>,
    pub tests: Vec<TestFunction<T>>,
    pub eps: T,
}

impl<T: Scalar> WeakNeighborhood<T> {
    pub fn contains<M: FiniteMeasure<T> + ?Sized>(&self, candidate: &M) -> Result<bool> {
        crate::measure::weak_contains(&self.center, &self.tests, self.eps, candidate)
    }
}

/// The basic mixed neighbourhood `O(f⃗, U, ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct MixedNeighborhood<T: Scalar> {
    pub center: Vec<TestFunction<T>>,
    pub weak: WeakNeighborhood<T>,
    pub eps: T,
}

/// `[g⃗, ν] ∈ O(f⃗, U, ε)` iff `ν ∈ U` and `Σᵢ‖gᵢ − fᵢ‖_{Lⁿ(ν)} < ε`.
pub fn mixed_contains<T: Scalar>(nbhd: &MixedNeighborhood<T>, point: &MixedPoint<T>) -> Result<bool> {
    if nbhd.center.len() != point.functions().len() {
        return Err(Error::OrderMismatch {
            expected: nbhd.center.len(),
            found: point.functions().len(),
        });
    }
    if !(nbhd.eps > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {}",
            nbhd.eps
        )));
    }
    if !nbhd.weak.contains(point.base())? {
        return Ok(false);
    }
    Ok(point.distance_to(&nbhd.center)? < nbhd.eps)
}

/// Both sides of `‖f‖_p ≤ μ(Ω)^{k/(p(p+k))}·‖f‖_{p+k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct HolderReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub slack: T,
}

pub fn holder_bound_check<T: Scalar, M: FiniteMeasure<T> + ?Sized>(
    f: &TestFunction<T>,
    mu: &M,
    p: u32,
    k: u32,
) -> Result<HolderReport<T>> {
    if p == 0 || k == 0 {
        return Err(Error::InvalidParameter("p and k must be at least 1".into()));
    }
    let (pf, kf) = (T::from_u32(p).unwrap(), T::from_u32(k).unwrap());
    let lhs = lp_norm(f, mu, pf)?;
    let rhs = mu.total_mass().powf(kf / (pf * (pf + kf))) * lp_norm(f, mu, pf + kf)?;
    Ok(HolderReport {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

/// Tolerance schedule and tail requirement of a convergence probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ProbeSettings<T> {
    /// Strictly decreasing positive tolerances.
    pub eps_schedule: Vec<T>,
    /// A level counts as reached only if at least this many trailing
    /// elements lie inside its neighbourhood.
    pub min_tail: usize,
}

impl<T: Scalar> Default for ProbeSettings<T> {
    fn default() -> Self {
        Self {
            eps_schedule: vec![T::of(1e-1), T::of(1e-2), T::of(1e-3)],
            min_tail: 2,
        }
    }
}

impl<T: Scalar> ProbeSettings<T> {
    fn validate(&self) -> Result<()> {
        if self.eps_schedule.is_empty() {
            return Err(Error::InvalidParameter("eps schedule is empty".into()));
        }
        if self.eps_schedule.iter().any(|e| !(*e > T::zero())) {
            return Err(Error::InvalidParameter("eps schedule must be positive".into()));
        }
        if self.eps_schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidParameter(
                "eps schedule must be strictly decreasing".into(),
            ));
        }
        if self.min_tail == 0 {
            return Err(Error::InvalidParameter("min_tail must be at least 1".into()));
        }
        Ok(())
    }

    pub fn finest(&self) -> T {
        *self.eps_schedule.last().expect("validated schedule")
    }
}

/// Centre functions and weak test functions a probe is measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ProbeBanks<T: Scalar> {
    pub approximant: Vec<TestFunction<T>>,
    pub test_bank: Vec<TestFunction<T>>,
}

/// Outcome at one tolerance of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct LevelEntry<T> {
    pub eps: T,
    /// First index from which every element lies in the neighbourhood.
    pub entry_index: Option<usize>,
    pub achieved: bool,
}

/// What a convergence probe observed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ConvergenceReport<T> {
    pub levels: Vec<LevelEntry<T>>,
    pub verdict: String,
    pub converged: bool,
    pub failing_eps: Option<T>,
    pub sequence_len: usize,
    pub min_tail: usize,
    pub approximant_size: usize,
    pub test_bank_size: usize,
    /// Largest weak-test deviation from the limit base, per element.
    pub weak_deviation: Vec<T>,
    /// `Σᵢ‖gᵢ − approxᵢ‖_{Lⁿ}` per element.
    pub function_deviation: Vec<T>,
}

pub const VERDICT_CONVERGED: &str = "converged (at test scale)";
pub const VERDICT_NOT_CONVERGED: &str = "not converged at scale";

/// Probes whether `seq` converges to `limit` through neighbourhoods centred
/// at `banks.approximant` with weak part from `banks.test_bank`.
pub fn converges_mixed<T: Scalar>(
    seq: &[MixedPoint<T>],
    limit: &MixedPoint<T>,
    banks: &ProbeBanks<T>,
    settings: &ProbeSettings<T>,
) -> Result<ConvergenceReport<T>> {
    settings.validate()?;
    let approx = &banks.approximant;
    if approx.len() != limit.functions().len() {
        return Err(Error::OrderMismatch {
            expected: limit.functions().len(),
            found: approx.len(),
        });
    }
    if let Some(i) = approx.iter().position(|a| !a.is_bounded()) {
        return Err(Error::Precondition(format!(
            "approximant component {i} is not flagged bounded continuous"
        )));
    }
    let defect = limit.distance_to(approx)?;
    let budget = settings.finest() * T::of(0.5);
    if !(defect < budget) {
        return Err(Error::Precondition(format!(
            "approximant deviates from the limit by {defect} in Lⁿ, needs < {budget}"
        )));
    }
    let limit_integrals = banks
        .test_bank
        .iter()
        .map(|t| integrate(t, limit.base()))
        .collect::<Result<Vec<_>>>()?;

    let mut weak_deviation = Vec::with_capacity(seq.len());
    let mut function_deviation = Vec::with_capacity(seq.len());
    for (m, point) in seq.iter().enumerate() {
        if point.functions().len() != limit.functions().len() || point.order() != limit.order() {
            return Err(Error::OrderMismatch {
                expected: limit.functions().len(),
                found: point.functions().len(),
            });
        }
        point
            .base()
            .space()
            .ensure_same(limit.base().space(), &format!("sequence element {m} and limit"))?;
        let mut worst = T::zero();
        for (t, reference) in banks.test_bank.iter().zip(&limit_integrals) {
            worst = worst.max((integrate(t, point.base())? - *reference).abs());
        }
        weak_deviation.push(worst);
        function_deviation.push(point.distance_to(approx)?);
    }

    let mut levels = Vec::with_capacity(settings.eps_schedule.len());
    for &eps in &settings.eps_schedule {
        let inside = |m: usize| weak_deviation[m] < eps && function_deviation[m] < eps;
        let mut entry = None;
        for m in (0..seq.len()).rev() {
            if inside(m) {
                entry = Some(m);
            } else {
                break;
            }
        }
        let achieved = entry.is_some_and(|n| seq.len() - n >= settings.min_tail);
        levels.push(LevelEntry {
            eps,
            entry_index: entry,
            achieved,
        });
    }
    let failing_eps = levels.iter().find(|l| !l.achieved).map(|l| l.eps);
    let converged = failing_eps.is_none();
    Ok(ConvergenceReport {
        levels,
        verdict: if converged {
            VERDICT_CONVERGED
        } else {
            VERDICT_NOT_CONVERGED
        }
        .to_string(),
        converged,
        failing_eps,
        sequence_len: seq.len(),
        min_tail: settings.min_tail,
        approximant_size: approx.len(),
        test_bank_size: banks.test_bank.len(),
        weak_deviation,
        function_deviation,
    })
}

/// `[f⃗, μ] ↦ [κ_*^μ f⃗, κ_*μ]`.
pub fn push_mixed_point<T: Scalar>(kappa: &Statistic<T>, point: &MixedPoint<T>) -> Result<MixedPoint<T>> {
    let image_base = pushforward_measure(kappa, point.base())?;
    let functions = point
        .functions()
        .iter()
        .map(|f| pushforward_function(kappa, f, point.base()).map(|ce| ce.function))
        .collect::<Result<Vec<_>>>()?;
    MixedPoint::with_order(functions, image_base, point.order())
}

/// Source and image probes of a sequence pushed through a statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ContinuityProbeReport<T> {
    pub source: ConvergenceReport<T>,
    pub image: ConvergenceReport<T>,
    /// False only when the source converged and the image did not.
    pub contract_holds: bool,
}

/// Runs [`converges_mixed`] on a sequence and on its image under `κ̃`.
///
/// On the finite target the image is probed against the exact image limit
/// as approximant and the atom indicators as test bank, which determine the
/// weak topology of a finite space, unless `image_banks` overrides them.
pub fn pushforward_map_continuity_probe<T: Scalar>(
    kappa: &Statistic<T>,
    seq: &[MixedPoint<T>],
    limit: &MixedPoint<T>,
    banks: &ProbeBanks<T>,
    settings: &ProbeSettings<T>,
    image_banks: Option<&ProbeBanks<T>>,
) -> Result<ContinuityProbeReport<T>> {
    let source = converges_mixed(seq, limit, banks, settings)?;
    let image_seq = seq
        .iter()
        .map(|p| push_mixed_point(kappa, p))
        .collect::<Result<Vec<_>>>()?;
    let image_limit = push_mixed_point(kappa, limit)?;
    let derived;
    let image_banks = match image_banks {
        Some(b) => b,
        None => {
            let target = kappa.target();
            derived = ProbeBanks {
                approximant: image_limit
                    .functions()
                    .iter()
                    .map(|f| f.clone().with_bounded(true))
                    .collect(),
                test_bank: (0..target.len()).map(|y| TestFunction::indicator(target, y)).collect(),
            };
            &derived
        }
    };
    let image = converges_mixed(&image_seq, &image_limit, image_banks, settings)?;
    Ok(ContinuityProbeReport {
        contract_holds: !source.converged || image.converged,
        source,
        image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{DiracCombination, Location, Measure, SampleSpace};

    fn half_half() -> (SampleSpace<f64>, Measure<f64>) {
        let s = SampleSpace::indexed(2).unwrap();
        let mu = Measure::new(s.clone(), vec![0.5, 0.5]).unwrap();
        (s, mu)
    }

    fn nbhd(s: &SampleSpace<f64>, mu: &Measure<f64>, eps: f64) -> MixedNeighborhood<f64> {
        MixedNeighborhood {
            center: vec![TestFunction::constant(s, 0.0)],
            weak: WeakNeighborhood {
                center: mu.clone().into(),
                tests: vec![TestFunction::constant(s, 1.0)],
                eps: 0.1,
            },
            eps,
        }
    }

    #[test]
    fn mixed_membership_examples() {
        let (s, mu) = half_half();
        let g = TestFunction::new(s.clone(), vec![1.0, -1.0], true).unwrap();
        let point = MixedPoint::new(vec![g], mu.clone()).unwrap();
        assert!(!mixed_contains(&nbhd(&s, &mu, 1.0), &point).unwrap());
        assert!(mixed_contains(&nbhd(&s, &mu, 1.5), &point).unwrap());

        let centre = MixedPoint::new(vec![TestFunction::constant(&s, 0.0)], mu.clone()).unwrap();
        assert!(mixed_contains(&nbhd(&s, &mu, 1e-9), &centre).unwrap());
    }

    #[test]
    fn mixed_membership_rejects_order_mismatch() {
        let (s, mu) = half_half();
        let f = TestFunction::constant(&s, 0.0);
        let point = MixedPoint::new(vec![f.clone(), f], mu.clone()).unwrap();
        assert!(matches!(
            mixed_contains(&nbhd(&s, &mu, 1.0), &point),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn holder_examples() {
        let (s, _) = half_half();
        let mu = Measure::new(s.clone(), vec![1.0, 1.0]).unwrap();
        let f = TestFunction::new(s.clone(), vec![3.0, 4.0], true).unwrap();
        let r = holder_bound_check(&f, &mu, 2, 2).unwrap();
        assert!((r.lhs - 5.0).abs() < 1e-14);
        assert!((r.rhs - 674f64.powf(0.25)).abs() < 1e-13);
        assert!(r.slack > 0.0);
        let c = TestFunction::constant(&s, 2.5);
        let r = holder_bound_check(&c, &Measure::new(s, vec![0.7, 2.1]).unwrap(), 3, 2).unwrap();
        assert!(r.slack.abs() < 1e-12);
    }

    fn dirac_sequence(
        s: &SampleSpace<f64>,
        f: &TestFunction<f64>,
        points: impl Iterator<Item = f64>,
    ) -> Vec<MixedPoint<f64>> {
        points
            .map(|t| {
                let d = DiracCombination::dirac(s, Location::Point(t), 1.0).unwrap();
                MixedPoint::new(vec![f.clone()], d).unwrap()
            })
            .collect()
    }

    #[test]
    fn constant_sequence_converges() {
        let (s, mu) = half_half();
        let f = TestFunction::new(s.clone(), vec![1.0, 2.0], true).unwrap();
        let limit = MixedPoint::new(vec![f.clone()], mu).unwrap();
        let seq = vec![limit.clone(); 5];
        let banks = ProbeBanks {
            approximant: vec![f],
            test_bank: vec![TestFunction::indicator(&s, 0), TestFunction::indicator(&s, 1)],
        };
        let r = converges_mixed(&seq, &limit, &banks, &ProbeSettings::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.verdict, VERDICT_CONVERGED);
        assert!(r.levels.iter().all(|l| l.entry_index == Some(0)));
    }

    #[test]
    fn shrinking_diracs_converge() {
        let s = SampleSpace::<f64>::uniform_grid(0.0, 1.0, 512).unwrap();
        let f = TestFunction::from_fn(&s, |t| (3.0 * t).sin()).unwrap();
        let seq = dirac_sequence(&s, &f, (1..=5000).map(|m| 0.5 + 0.5 / m as f64));
        let limit = dirac_sequence(&s, &f, std::iter::once(0.5)).pop().unwrap();
        let banks = ProbeBanks {
            approximant: vec![f.clone()],
            test_bank: vec![
                TestFunction::from_fn(&s, |t| t).unwrap(),
                TestFunction::from_fn(&s, |t| (2.0 * t).cos()).unwrap(),
            ],
        };
        let r = converges_mixed(&seq, &limit, &banks, &ProbeSettings::default()).unwrap();
        assert!(r.converged, "{:?}", r.levels);
        // worst test deviation max(0.5/m, |cos(1 + 1/m) − cos 1|), in closed form
        let first = (1..=5000)
            .find(|&m| {
                let m = m as f64;
                (0.5 / m).max(((1.0 + 1.0 / m).cos() - 1f64.cos()).abs()) < 1e-3
            })
            .unwrap();
        assert_eq!(r.levels[2].entry_index, Some(first - 1));
    }

    #[test]
    fn alternating_diracs_do_not_converge() {
        let s = SampleSpace::<f64>::discrete(["-1", "1"]).unwrap();
        let f = TestFunction::constant(&s, 1.0);
        let t = TestFunction::from_fn(&s, |t| t).unwrap();
        let seq: Vec<_> = (0..40)
            .map(|m| {
                let d = DiracCombination::dirac(&s, Location::Node(m % 2), 1.0).unwrap();
                MixedPoint::new(vec![f.clone()], d).unwrap()
            })
            .collect();
        let limit = seq[1].clone();
        let banks = ProbeBanks {
            approximant: vec![f],
            test_bank: vec![t],
        };
        let r = converges_mixed(&seq, &limit, &banks, &ProbeSettings::default()).unwrap();
        assert!(!r.converged);
        assert_eq!(r.verdict, VERDICT_NOT_CONVERGED);
        assert_eq!(r.failing_eps, Some(0.1));
        assert!((r.weak_deviation[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn approximant_precondition_is_checked() {
        let (s, mu) = half_half();
        let f = TestFunction::constant(&s, 1.0);
        let limit = MixedPoint::new(vec![f], mu).unwrap();
        let banks = ProbeBanks {
            approximant: vec![TestFunction::constant(&s, 1.1)],
            test_bank: vec![],
        };
        assert!(matches!(
            converges_mixed(std::slice::from_ref(&limit), &limit, &banks, &ProbeSettings::default()),
            Err(Error::Precondition(_))
        ));
        let unbounded = ProbeBanks {
            approximant: vec![TestFunction::constant(&s, 1.0).with_bounded(false)],
            test_bank: vec![],
        };
        assert!(converges_mixed(
            std::slice::from_ref(&limit),
            &limit,
            &unbounded,
            &ProbeSettings::default()
        )
        .is_err());
    }

    #[test]
    fn binned_dirac_sequence_image_converges() {
        let s = SampleSpace::<f64>::uniform_grid(0.0, 1.0, 512).unwrap();
        let target = SampleSpace::indexed(2).unwrap();
        let kappa = Statistic::binning(s.clone(), target, vec![0.0, 0.5, 1.0], vec![0, 1]).unwrap();
        let f = TestFunction::from_fn(&s, |t| t * t).unwrap();
        let seq = dirac_sequence(&s, &f, (2..=4000).map(|m| 0.5 + 1.0 / m as f64));
        let limit = dirac_sequence(&s, &f, std::iter::once(0.5)).pop().unwrap();
        let banks = ProbeBanks {
            approximant: vec![f.clone()],
            test_bank: vec![TestFunction::from_fn(&s, |t| t).unwrap()],
        };
        let r =
            pushforward_map_continuity_probe(&kappa, &seq, &limit, &banks, &ProbeSettings::default(), None).unwrap();
        assert!(r.source.converged);
        assert!(r.image.converged);
        assert!(r.contract_holds);
        let image_limit = push_mixed_point(&kappa, &limit).unwrap();
        assert_eq!(image_limit.base().total_mass(), 1.0);
        // t² is linearly interpolated at 0.5 between grid nodes
        assert!((image_limit.functions()[0].values()[1] - 0.25).abs() < 1e-5);
    }
}
