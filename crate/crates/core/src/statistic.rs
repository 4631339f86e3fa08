//! Statistics (measurable maps into finite spaces), pushforward of measures
//! and the conditional-expectation operator on functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{lp_norm, FiniteMeasure, Location, Measure, SampleSpace, TestFunction};
use crate::scalar::{compensated_sum, Scalar};

/// How source points are sent to target atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub enum StatisticRule<T> {
    /// Atom `i` of a discrete source goes to target atom `table[i]`.
    Table(Vec<usize>),
    /// Cell `[edges[j], edges[j+1])` of an interval source goes to target atom `targets[j]`.
    Bins { edges: Vec<T>, targets: Vec<usize> },
}

/// A measurable map from a sample space into a finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStatistic<T>", into = "RawStatistic<T>")]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct Statistic<T: Scalar> {
    source: SampleSpace<T>,
    target: SampleSpace<T>,
    rule: StatisticRule<T>,
    node_targets: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct RawStatistic<T: Scalar> {
    pub source: SampleSpace<T>,
    pub target: SampleSpace<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<RawBins<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct RawBins<T: Scalar> {
    pub edges: Vec<T>,
    pub targets: Vec<usize>,
}

impl<T: Scalar> TryFrom<RawStatistic<T>> for Statistic<T> {
    type Error = Error;
    fn try_from(raw: RawStatistic<T>) -> Result<Self> {
        match (raw.assignment, raw.bins) {
            (Some(table), None) => Statistic::from_table(raw.source, raw.target, table),
            (None, Some(b)) => Statistic::binning(raw.source, raw.target, b.edges, b.targets),
            _ => Err(Error::InvalidStatistic(
                "exactly one of \"assignment\" or \"bins\" must be given".into(),
            )),
        }
    }
}

impl<T: Scalar> From<Statistic<T>> for RawStatistic<T> {
    fn from(s: Statistic<T>) -> Self {
        let (assignment, bins) = match s.rule {
            StatisticRule::Table(t) => (Some(t), None),
            StatisticRule::Bins { edges, targets } => (None, Some(RawBins { edges, targets })),
        };
        RawStatistic {
            source: s.source,
            target: s.target,
            assignment,
            bins,
        }
    }
}

/// Conditional expectation of a function along a statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalExpectation<T: Scalar> {
    pub function: TestFunction<T>,
    /// Target atoms whose fiber carries no mass; their value is set to 0.
    pub outside_support: Vec<bool>,
}

/// Norms of a function before and after conditional expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar", serialize = "T: Scalar"))]
pub struct ContractionReport<T> {
    pub p: T,
    pub norm_before: T,
    pub norm_after: T,
    pub slack: T,
    /// Set when `p < 2`, where contraction is reported but not guaranteed here.
    pub extrapolated: bool,
}

impl<T: Scalar> Statistic<T> {
    pub fn from_table(source: SampleSpace<T>, target: SampleSpace<T>, table: Vec<usize>) -> Result<Self> {
        if !source.is_discrete() {
            return Err(Error::InvalidStatistic(
                "interval sources push forward through a binning rule".into(),
            ));
        }
        Self::check_target(&target)?;
        if table.len() != source.len() {
            return Err(Error::InvalidStatistic(format!(
                "assignment has {} entries for {} source atoms",
                table.len(),
                source.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&y| y >= target.len()) {
            return Err(Error::InvalidStatistic(format!("target atom {bad} does not exist")));
        }
        Ok(Self {
            node_targets: table.clone(),
            rule: StatisticRule::Table(table),
            source,
            target,
        })
    }

    pub fn binning(source: SampleSpace<T>, target: SampleSpace<T>, edges: Vec<T>, targets: Vec<usize>) -> Result<Self> {
        let (lower, upper) = source
            .bounds()
            .ok_or_else(|| Error::InvalidStatistic("binning needs an interval source".into()))?;
        Self::check_target(&target)?;
        if edges.len() < 2 || edges.len() != targets.len() + 1 {
            return Err(Error::InvalidStatistic(format!(
                "{} edges for {} bins",
                edges.len(),
                targets.len()
            )));
        }
        if edges[0] != lower || edges[edges.len() - 1] != upper || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidStatistic(
                "bin edges must increase strictly from the lower to the upper bound".into(),
            ));
        }
        if let Some(bad) = targets.iter().find(|&&y| y >= target.len()) {
            return Err(Error::InvalidStatistic(format!("target atom {bad} does not exist")));
        }
        let rule = StatisticRule::Bins { edges, targets };
        let node_targets = (0..source.len())
            .map(|i| Self::apply_rule(&rule, &source, &Location::Node(i)))
            .collect();
        Ok(Self {
            source,
            target,
            rule,
            node_targets,
        })
    }

    /// Identity on a discrete space.
    pub fn identity(space: &SampleSpace<T>) -> Result<Self> {
        Self::from_table(space.clone(), space.clone(), (0..space.len()).collect())
    }

    /// Collapses a discrete space onto a single atom.
    pub fn constant(space: &SampleSpace<T>) -> Result<Self> {
        Self::from_table(space.clone(), SampleSpace::indexed(1)?, vec![0; space.len()])
    }

    fn check_target(target: &SampleSpace<T>) -> Result<()> {
        if target.is_discrete() {
            Ok(())
        } else {
            Err(Error::InvalidStatistic(
                "statistics map into discrete target spaces".into(),
            ))
        }
    }

    fn apply_rule(rule: &StatisticRule<T>, source: &SampleSpace<T>, loc: &Location<T>) -> usize {
        match rule {
            StatisticRule::Table(table) => match loc {
                Location::Node(i) => table[*i],
                Location::Point(_) => unreachable!("points are rejected on discrete sources"),
            },
            StatisticRule::Bins { edges, targets } => {
                let t = source.coordinate(loc);
                let bin = edges.partition_point(|&e| e <= t).clamp(1, edges.len() - 1) - 1;
                targets[bin]
            }
        }
    }

    pub fn source(&self) -> &SampleSpace<T> {
        &self.source
    }

    pub fn target(&self) -> &SampleSpace<T> {
        &self.target
    }

    pub fn rule(&self) -> &StatisticRule<T> {
        &self.rule
    }

    /// Target atom of every source atom or node.
    pub fn assignment(&self) -> &[usize] {
        &self.node_targets
    }

    pub fn target_of(&self, loc: &Location<T>) -> usize {
        match loc {
            Location::Node(i) => self.node_targets[*i],
            Location::Point(_) => Self::apply_rule(&self.rule, &self.source, loc),
        }
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        self.node_targets
            .iter()
            .all(|&y| !std::mem::replace(&mut seen[y], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &y in &self.node_targets {
            seen[y] = true;
        }
        seen.into_iter().all(|s| s)
    }

    /// The function `g ∘ κ` on the source.
    pub fn lift(&self, g: &TestFunction<T>) -> Result<TestFunction<T>> {
        g.space()
            .ensure_same(&self.target, "lifted function must live on the target")?;
        let values = self.node_targets.iter().map(|&y| g.values()[y]).collect();
        TestFunction::new(self.source.clone(), values, g.is_bounded())
    }
}

fn fiber_sums<T: Scalar>(kappa: &Statistic<T>, terms: impl Iterator<Item = (usize, T)>) -> Vec<T> {
    let mut buckets = vec![Vec::new(); kappa.target().len()];
    for (y, v) in terms {
        buckets[y].push(v);
    }
    buckets.into_iter().map(compensated_sum).collect()
}

/// The image measure `κ_*μ` on the target atoms.
pub fn pushforward_measure<T: Scalar, M: FiniteMeasure<T> + ?Sized>(
    kappa: &Statistic<T>,
    mu: &M,
) -> Result<Measure<T>> {
    mu.space()
        .ensure_same(kappa.source(), "measure must live on the statistic's source")?;
    let masses = fiber_sums(
        kappa,
        mu.weighted_support()
            .into_iter()
            .map(|(loc, m)| (kappa.target_of(&loc), m)),
    );
    Measure::new(kappa.target().clone(), masses)
}

/// `κ_*f(y) = Σ_{κ(ω)=y} f(ω)μ(ω) / Σ_{κ(ω)=y} μ(ω)`, the μ-weighted fiber average.
pub fn pushforward_function<T: Scalar, M: FiniteMeasure<T> + ?Sized>(
    kappa: &Statistic<T>,
    f: &TestFunction<T>,
    mu: &M,
) -> Result<ConditionalExpectation<T>> {
    mu.space()
        .ensure_same(kappa.source(), "measure must live on the statistic's source")?;
    f.space()
        .ensure_same(kappa.source(), "function must live on the statistic's source")?;
    let support = mu.weighted_support();
    let weighted = fiber_sums(
        kappa,
        support
            .iter()
            .map(|(loc, m)| (kappa.target_of(loc), f.value_at(loc) * *m)),
    );
    let masses = fiber_sums(kappa, support.iter().map(|(loc, m)| (kappa.target_of(loc), *m)));
    let outside_support: Vec<bool> = masses.iter().map(|m| !(*m > T::zero())).collect();
    // A fiber holding a single charged point keeps its value exactly.
    let mut single: Vec<(usize, T)> = vec![(0, T::zero()); masses.len()];
    for (loc, m) in &support {
        if *m > T::zero() {
            let slot = &mut single[kappa.target_of(loc)];
            slot.0 += 1;
            slot.1 = f.value_at(loc);
        }
    }
    let values = weighted
        .into_iter()
        .zip(&masses)
        .zip(&single)
        .map(|((w, m), (count, value))| match (*m > T::zero(), *count) {
            (false, _) => T::zero(),
            (true, 1) => *value,
            (true, _) => w / *m,
        })
        .collect();
    Ok(ConditionalExpectation {
        function: TestFunction::new(kappa.target().clone(), values, f.is_bounded())?,
        outside_support,
    })
}

/// The composite statistic `κ₂ ∘ κ₁`.
pub fn compose<T: Scalar>(kappa2: &Statistic<T>, kappa1: &Statistic<T>) -> Result<Statistic<T>> {
    kappa1
        .target()
        .ensure_same(kappa2.source(), "composition needs target(κ₁) = source(κ₂)")?;
    let outer = kappa2.assignment();
    match kappa1.rule() {
        StatisticRule::Table(table) => Statistic::from_table(
            kappa1.source().clone(),
            kappa2.target().clone(),
            table.iter().map(|&y| outer[y]).collect(),
        ),
        StatisticRule::Bins { edges, targets } => Statistic::binning(
            kappa1.source().clone(),
            kappa2.target().clone(),
            edges.clone(),
            targets.iter().map(|&y| outer[y]).collect(),
        ),
    }
}

/// Compares `‖f‖_{Lᵖ(μ)}` with `‖κ_*f‖_{Lᵖ(κ_*μ)}`.
pub fn contraction_report<T: Scalar, M: FiniteMeasure<T> + ?Sized>(
    kappa: &Statistic<T>,
    f: &TestFunction<T>,
    mu: &M,
    p: T,
) -> Result<ContractionReport<T>> {
    let image = pushforward_measure(kappa, mu)?;
    let conditional = pushforward_function(kappa, f, mu)?;
    let norm_before = lp_norm(f, mu, p)?;
    let norm_after = lp_norm(&conditional.function, &image, p)?;
    Ok(ContractionReport {
        p,
        norm_before,
        norm_after,
        slack: norm_before - norm_after,
        extrapolated: p < T::of(2.0),
    })
}
