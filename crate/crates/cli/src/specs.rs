//! Construction of library objects from configuration specs.

use infogeom::measure::{Measure, SampleSpace, TestFunction};
use infogeom::model::ParametrizedModel;
use infogeom::statistic::Statistic;
use infogeom::tensor::{CovariantTensorField, WeakFunctional, Weight};
use infogeom::zoo;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, FunctionalSpec, ModelSpec, StatisticSpec, TensorSpec, WeightSpec};

pub const DEFAULT_LAPLACE_NODES: usize = 4000;

fn invalid(what: &str, e: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("{what}: {e}"))
}

/// A constructed model together with the statistic it is sufficient for, if any.
pub struct BuiltModel {
    pub model: ParametrizedModel<f64>,
    pub projection: Option<Statistic<f64>>,
    pub categorical: bool,
}

pub fn build_model(spec: &ModelSpec) -> Result<BuiltModel, ConfigError> {
    let plain = |model| BuiltModel {
        model,
        projection: None,
        categorical: false,
    };
    let e = |e| invalid("model", e);
    Ok(match spec {
        ModelSpec::Bernoulli => plain(zoo::bernoulli().map_err(e)?),
        ModelSpec::Categorical { atoms } => {
            let n = atoms.unwrap_or(3);
            BuiltModel {
                model: zoo::categorical(n).map_err(e)?,
                projection: None,
                categorical: true,
            }
        }
        ModelSpec::Factorized { q, r, perturbation } => {
            let q = build_model(q)?.model;
            let fm = match perturbation {
                Some(s) if *s != 0.0 => zoo::entangled(&q, r.clone(), *s),
                _ => zoo::factorized(&q, r.clone()),
            }
            .map_err(e)?;
            BuiltModel {
                model: fm.model,
                projection: Some(fm.projection),
                categorical: false,
            }
        }
        ModelSpec::HeavyTail {
            k,
            panels,
            order,
            cutoff,
        } => {
            let space = SampleSpace::log_graded_grid(
                0.0,
                cutoff.unwrap_or(zoo::HEAVY_TAIL_CUTOFF),
                1.0,
                panels.unwrap_or(zoo::HEAVY_TAIL_PANELS),
                order.unwrap_or(zoo::HEAVY_TAIL_ORDER),
            )
            .map_err(e)?;
            plain(zoo::heavy_tail_on(*k, space).map_err(e)?)
        }
        ModelSpec::Laplace {
            theta_min,
            theta_max,
            nodes,
        } => plain(zoo::laplace(*theta_min, *theta_max, nodes.unwrap_or(DEFAULT_LAPLACE_NODES)).map_err(e)?),
        ModelSpec::Expfam { reference, statistic } => {
            let space = SampleSpace::indexed(reference.len()).map_err(e)?;
            let reference = Measure::new(space.clone(), reference.clone()).map_err(e)?;
            let t = TestFunction::new(space, statistic.clone(), true).map_err(e)?;
            plain(zoo::exponential_family(reference, t).map_err(e)?)
        }
    })
}

pub fn weight_on(spec: &WeightSpec, space: &SampleSpace<f64>) -> Result<Weight<f64>, ConfigError> {
    Ok(match spec {
        WeightSpec::Constant { value } => Weight::Constant(*value),
        WeightSpec::Monomial { coefficient, power } => Weight::Monomial {
            coefficient: *coefficient,
            power: *power,
        },
        WeightSpec::Values { values } => {
            Weight::Function(TestFunction::new(space.clone(), values.clone(), true).map_err(|e| invalid("weight", e))?)
        }
    })
}

/// A test function on `space` from a weight spec.
pub fn function_on(spec: &WeightSpec, space: &SampleSpace<f64>) -> Result<TestFunction<f64>, ConfigError> {
    let e = |e| invalid("function", e);
    match spec {
        WeightSpec::Constant { value } => Ok(TestFunction::constant(space, *value)),
        WeightSpec::Monomial { coefficient, power } => {
            TestFunction::from_fn(space, |t| coefficient * t.powi(*power)).map_err(e)
        }
        WeightSpec::Values { values } => TestFunction::new(space.clone(), values.clone(), true).map_err(e),
    }
}

fn functional(spec: &FunctionalSpec) -> WeakFunctional<f64> {
    match spec {
        FunctionalSpec::Constant { value } => WeakFunctional::constant(*value),
        FunctionalSpec::MassPower { coefficient, power } => WeakFunctional::mass_power(*coefficient, *power),
    }
}

/// The tensor of `spec` for base measures on `space`.
pub fn build_tensor(spec: &TensorSpec, space: &SampleSpace<f64>) -> Result<CovariantTensorField<f64>, ConfigError> {
    let e = |e| invalid("tensor", e);
    match spec {
        TensorSpec::Tgc { order, g, c } => {
            CovariantTensorField::tgc(*order, weight_on(g, space)?, functional(c)).map_err(e)
        }
        TensorSpec::Canonical { order } => CovariantTensorField::canonical(*order).map_err(e),
        TensorSpec::Zero { order } => CovariantTensorField::zero(*order).map_err(e),
        TensorSpec::Euclidean => Ok(CovariantTensorField::euclidean()),
    }
}

pub fn tensor_order(spec: &TensorSpec) -> usize {
    match spec {
        TensorSpec::Tgc { order, .. } | TensorSpec::Canonical { order } | TensorSpec::Zero { order } => *order,
        TensorSpec::Euclidean => 2,
    }
}

/// Strong continuity is asserted only for `T_{g,c}` fields.
pub fn tensor_is_tgc(spec: &TensorSpec) -> bool {
    !matches!(spec, TensorSpec::Euclidean)
}

pub fn build_statistic(
    spec: &StatisticSpec,
    source: &SampleSpace<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<Statistic<f64>, ConfigError> {
    let e = |e| invalid("statistic", e);
    match spec {
        StatisticSpec::Random { target_len } => {
            let m = match target_len {
                Some(m) => *m,
                None => rng.gen_range(1..=source.len()),
            };
            infogeom::sampling::random_surjective_statistic(rng, source, m).map_err(e)
        }
        StatisticSpec::Identity => Statistic::identity(source).map_err(e),
        StatisticSpec::Table { table, target_len } => {
            let target = SampleSpace::indexed(*target_len).map_err(e)?;
            Statistic::from_table(source.clone(), target, table.clone()).map_err(e)
        }
    }
}

/// A random interior parameter point of `model`.
pub fn random_point(model: &ParametrizedModel<f64>, categorical: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if categorical {
        let p = infogeom::sampling::random_masses::<f64>(rng, model.space().len());
        if let Ok(x) = zoo::categorical_coordinates(&p) {
            return x;
        }
    }
    let domain = model.domain();
    domain
        .lower
        .iter()
        .zip(&domain.upper)
        .map(|(&lo, &hi)| {
            let (lo, hi) = (lo.max(-2.0), hi.min(2.0));
            let margin = 0.05 * (hi - lo);
            rng.gen_range(lo + margin..hi - margin)
        })
        .collect()
}
