//! The verification suites: per-trial checks run in parallel and merged by
//! trial index.

use anyhow::Result;
use infogeom::measure::{Measure, SampleSpace, TestFunction};
use infogeom::model::integrability_scan;
use infogeom::sampling::{
    random_embedding, random_function, random_masses, random_measure, random_permutation, random_unit_tangent,
    random_vector, rng, trial_seed,
};
use infogeom::statistic::{contraction_report, Statistic};
use infogeom::tensor::{strong_continuity_probe, CovariantTensorField};
use infogeom::topology::{pushforward_map_continuity_probe, MixedPoint, ProbeBanks, ProbeSettings};
use infogeom::verify::{
    ac_monotonicity_probe, chentsov_invariance_residual, dyadic_partitions, monotonicity_check, uniqueness_limit_probe,
};
use infogeom::zoo;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{
    default_grid_nodes, ConfigError, ModelSpec, StatisticSpec, Suite, SuiteConfig, TensorSpec, Tolerances, WeightSpec,
};
use crate::report::Record;
use crate::specs::{
    build_model, build_statistic, build_tensor, function_on, random_point, tensor_is_tgc, tensor_order, BuiltModel,
};

pub const DEFAULT_UNIQUENESS_NODES: usize = 4096;
pub const DEFAULT_UNIQUENESS_LEVELS: u32 = 10;
pub const DEFAULT_SEQUENCE_LENGTH: usize = 80;

type Trial = Box<dyn Fn(u64, u64) -> Result<Record> + Send + Sync>;

/// A validated suite ready to run.
pub struct Plan {
    trials: u64,
    seed: u64,
    run: Trial,
}

impl Plan {
    /// Runs every trial on the current rayon pool; records come back in
    /// trial order whatever the scheduling.
    pub fn execute(&self) -> Result<Vec<Record>> {
        (0..self.trials)
            .into_par_iter()
            .map(|i| (self.run)(i, trial_seed(self.seed, i)))
            .collect()
    }
}

fn config_error(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

fn discrete(model: &BuiltModel) -> Result<(), ConfigError> {
    if model.model.space().is_discrete() {
        Ok(())
    } else {
        Err(config_error(format!(
            "model {} needs a finite sample space for this suite",
            model.model.name()
        )))
    }
}

fn check_statistic(spec: &StatisticSpec, source: &SampleSpace<f64>) -> Result<(), ConfigError> {
    build_statistic(spec, source, &mut rng(0)).map(|_| ())
}

fn space_free_tensor(spec: &TensorSpec) -> Result<(), ConfigError> {
    if let TensorSpec::Tgc {
        g: WeightSpec::Values { .. },
        ..
    } = spec
    {
        return Err(config_error(
            "this suite varies the sample space; use a constant or monomial weight",
        ));
    }
    Ok(())
}

pub fn plan(suite: Suite, config: &SuiteConfig, tol: Tolerances) -> Result<Plan, ConfigError> {
    let run = match suite {
        Suite::Monotonicity => monotonicity(config, tol)?,
        Suite::Sufficiency => sufficiency(config, tol)?,
        Suite::Contraction => contraction(config, tol)?,
        Suite::Chentsov => chentsov(config, tol)?,
        Suite::Uniqueness => uniqueness(config, tol)?,
        Suite::Continuity => continuity(config)?,
        Suite::Integrability => integrability(config)?,
    };
    let trials = if suite == Suite::Integrability {
        1
    } else {
        config.trials
    };
    Ok(Plan {
        trials,
        seed: config.seed,
        run,
    })
}

fn fixed_model(spec: Option<&ModelSpec>) -> Result<Option<BuiltModel>, ConfigError> {
    let model = spec.map(build_model).transpose()?;
    if let Some(m) = &model {
        discrete(m)?;
    }
    Ok(model)
}

fn monotonicity(config: &SuiteConfig, tol: Tolerances) -> Result<Trial, ConfigError> {
    let fixed = fixed_model(config.model.as_ref())?;
    let statistic = config
        .statistic
        .clone()
        .unwrap_or(StatisticSpec::Random { target_len: None });
    if let Some(m) = &fixed {
        check_statistic(&statistic, m.model.space())?;
    } else if !matches!(statistic, StatisticSpec::Random { .. } | StatisticSpec::Identity) {
        return Err(config_error("a table statistic needs a fixed model"));
    }
    let max_atoms = config.params.max_atoms.unwrap_or(8);
    Ok(Box::new(move |trial, seed| {
        let mut r = rng(seed);
        let random;
        let built = match &fixed {
            Some(m) => m,
            None => {
                let n = r.gen_range(2..=max_atoms);
                random = BuiltModel {
                    model: zoo::categorical(n)?,
                    projection: None,
                    categorical: true,
                };
                &random
            }
        };
        let model = &built.model;
        let kappa = build_statistic(&statistic, model.space(), &mut r)?;
        let x = random_point(model, built.categorical, &mut r);
        let v: Vec<f64> = random_vector(&mut r, model.param_dim(), -1.0, 1.0);
        let loss = monotonicity_check(model, &kappa, &x, &v)?;
        let ac = ac_monotonicity_probe(model, &kappa, &x, &v)?;
        let inputs = json!({"model": model.name(), "statistic": kappa.assignment(), "x": x, "v": v});
        let mut rec = Record::new("fisher_loss", trial, seed, &inputs);
        rec.set("before", loss.before)
            .set("after", loss.after)
            .set("loss", loss.loss)
            .set("ac_before", ac.ac_before)
            .set("ac_after", ac.ac_after)
            .set("l3_before", ac.l3_before)
            .set("l3_after", ac.l3_after)
            .set("ac_abs_decreases", f64::from(u8::from(ac.abs_decreases)));
        let ok = loss.loss >= -tol.loss;
        rec.assert(
            ok,
            if ok {
                "loss ≥ −tolerance"
            } else {
                "information gained under a statistic"
            },
        );
        Ok(rec)
    }))
}

fn sufficiency(config: &SuiteConfig, tol: Tolerances) -> Result<Trial, ConfigError> {
    let spec = config.model.clone().unwrap_or(ModelSpec::Factorized {
        q: Box::new(ModelSpec::Bernoulli),
        r: vec![0.2, 0.3, 0.5],
        perturbation: None,
    });
    let built = build_model(&spec)?;
    discrete(&built)?;
    if let Some(s) = &config.statistic {
        check_statistic(s, built.model.space())?;
    }
    let statistic = config.statistic.clone();
    Ok(Box::new(move |trial, seed| {
        let mut r = rng(seed);
        let model = &built.model;
        let kappa: Statistic<f64> = match (&statistic, &built.projection) {
            (Some(s), _) => build_statistic(s, model.space(), &mut r)?,
            (None, Some(p)) => p.clone(),
            (None, None) => random_permutation(&mut r, model.space())?,
        };
        let x = random_point(model, built.categorical, &mut r);
        let v: Vec<f64> = random_vector(&mut r, model.param_dim(), -1.0, 1.0);
        let loss = monotonicity_check(model, &kappa, &x, &v)?;
        let inputs = json!({"model": model.name(), "statistic": kappa.assignment(), "x": x, "v": v});
        let mut rec = Record::new("sufficient_loss", trial, seed, &inputs);
        rec.set("before", loss.before)
            .set("after", loss.after)
            .set("loss", loss.loss);
        let ok = loss.loss.abs() <= tol.sufficiency;
        rec.assert(
            ok,
            if ok {
                "|loss| ≤ tolerance"
            } else {
                "statistic loses information"
            },
        );
        Ok(rec)
    }))
}

fn contraction(config: &SuiteConfig, tol: Tolerances) -> Result<Trial, ConfigError> {
    let statistic = config
        .statistic
        .clone()
        .unwrap_or(StatisticSpec::Random { target_len: None });
    let fixed_len = match &statistic {
        StatisticSpec::Table { table, .. } => Some(table.len()),
        _ => None,
    };
    if let Some(n) = fixed_len {
        check_statistic(
            &statistic,
            &SampleSpace::indexed(n).map_err(|e| config_error(e.to_string()))?,
        )?;
    }
    let max_atoms = config.params.max_atoms.unwrap_or(12);
    let ps = config.params.p.clone().unwrap_or_else(|| vec![2, 3, 4]);
    Ok(Box::new(move |trial, seed| {
        let mut r = rng(seed);
        let n = fixed_len.unwrap_or_else(|| r.gen_range(2..=max_atoms));
        let space = SampleSpace::<f64>::indexed(n)?;
        let kappa = build_statistic(&statistic, &space, &mut r)?;
        let amplitude = r.gen_range(0.1..10.0);
        let f = random_function(&mut r, &space, amplitude)?;
        let mass = r.gen_range(0.1..10.0);
        let mu = random_measure(&mut r, &space, mass)?;
        let p = f64::from(ps[r.gen_range(0..ps.len())]);
        let rep = contraction_report(&kappa, &f, &mu, p)?;
        let inputs = json!({"statistic": kappa.assignment(), "f": f.values(), "mu": mu.values(), "p": p});
        let mut rec = Record::new("contraction", trial, seed, &inputs);
        rec.set("p", p)
            .set("norm_before", rep.norm_before)
            .set("norm_after", rep.norm_after)
            .set("slack", rep.norm_before - rep.norm_after);
        let ok = rep.norm_after <= rep.norm_before + tol.contraction;
        rec.assert(
            ok,
            if ok {
                "‖κ_*f‖_p ≤ ‖f‖_p"
            } else {
                "conditional expectation expands the norm"
            },
        );
        Ok(rec)
    }))
}

fn chentsov(config: &SuiteConfig, tol: Tolerances) -> Result<Trial, ConfigError> {
    let spec = config.tensor.clone().unwrap_or(TensorSpec::Canonical { order: 2 });
    if tensor_order(&spec) != 2 {
        return Err(config_error("the chentsov suite needs a tensor of order 2"));
    }
    space_free_tensor(&spec)?;
    let form: CovariantTensorField<f64> = build_tensor(
        &spec,
        &SampleSpace::indexed(1).map_err(|e| config_error(e.to_string()))?,
    )?;
    let max_atoms = config.params.max_atoms.unwrap_or(6);
    let min_blocks = config.params.min_blocks.unwrap_or(1);
    Ok(Box::new(move |trial, seed| {
        let mut r = rng(seed);
        let n = r.gen_range(2..=max_atoms);
        let mu = Measure::new(SampleSpace::indexed(n)?, random_masses(&mut r, n))?;
        let u: Vec<f64> = random_unit_tangent(&mut r, n);
        let k = random_embedding(&mut r, n, min_blocks)?;
        let residual = chentsov_invariance_residual(&form, &k, &mu, &u)?;
        let inputs = json!({"mu": mu.values(), "u": u, "splits": k.splits()});
        let mut rec = Record::new("chentsov_residual", trial, seed, &inputs);
        rec.set("source_atoms", n as f64)
            .set("target_atoms", k.target_len() as f64)
            .set("residual", residual);
        let ok = residual.abs() <= tol.chentsov;
        rec.assert(
            ok,
            if ok {
                "invariant under the embedding"
            } else {
                "form changes under a congruent embedding"
            },
        );
        Ok(rec)
    }))
}

fn uniqueness(config: &SuiteConfig, tol: Tolerances) -> Result<Trial, ConfigError> {
    let spec = config.tensor.clone().unwrap_or(TensorSpec::Canonical { order: 2 });
    if tensor_order(&spec) != 2 {
        return Err(config_error("the uniqueness suite needs a tensor of order 2"));
    }
    let nodes = match config.params.nodes {
        Some(n) => n,
        None => default_grid_nodes(DEFAULT_UNIQUENESS_NODES)?,
    };
    let levels = config.params.levels.unwrap_or(DEFAULT_UNIQUENESS_LEVELS);
    if levels > 24 || (1usize << levels) > nodes {
        return Err(config_error(format!(
            "{levels} dyadic levels need at least 2^{levels} grid nodes, have {nodes}"
        )));
    }
    let e = |e: infogeom::Error| config_error(e.to_string());
    let space = SampleSpace::<f64>::uniform_grid(0.0, 1.0, nodes).map_err(e)?;
    let f_spec = config.params.f.clone().unwrap_or(WeightSpec::Monomial {
        coefficient: 1.0,
        power: 1,
    });
    let f = function_on(&f_spec, &space)?;
    let form = build_tensor(&spec, &space)?;
    let partitions = dyadic_partitions(&space, levels).map_err(e)?;
    let uniqueness_tol = tol.uniqueness;
    Ok(Box::new(move |trial, seed| {
        let mu = if trial == 0 {
            Measure::reference(&space)
        } else {
            let mut r: ChaCha8Rng = rng(seed);
            let mass = r.gen_range(0.5..2.0);
            random_measure(&mut r, &space, mass)?
        };
        let rep = uniqueness_limit_probe(&form, &mu, &f, &partitions, Some(uniqueness_tol))?;
        let last = *rep.values.last().expect("at least one level");
        let inputs = json!({"nodes": nodes, "levels": levels, "mu": mu.values(), "f": f.values()});
        let mut rec = Record::new("uniqueness_limit", trial, seed, &inputs);
        rec.set("cells", rep.cells.iter().map(|c| *c as f64).collect::<Vec<_>>())
            .set("values", rep.values.clone())
            .set("final_value", last)
            .set("continuum_value", rep.continuum_value)
            .set("fisher_reference", rep.fisher_reference)
            .set("error", (last - rep.continuum_value).abs())
            .set("agrees_with_fisher", f64::from(u8::from(rep.agrees_with_fisher)))
            .set("monotone", f64::from(u8::from(rep.monotone)));
        let verdict = match (rep.converged, rep.agrees_with_fisher) {
            (true, true) => "converged; matches the Fisher value",
            (true, false) => "converged; differs from the Fisher value",
            (false, _) => "refinements do not reach the continuum value",
        };
        rec.assert(rep.converged, verdict);
        Ok(rec)
    }))
}

fn continuity(config: &SuiteConfig) -> Result<Trial, ConfigError> {
    let spec = config.tensor.clone().unwrap_or(TensorSpec::Canonical { order: 2 });
    space_free_tensor(&spec)?;
    let order = tensor_order(&spec);
    let tensor = build_tensor(
        &spec,
        &SampleSpace::indexed(1).map_err(|e| config_error(e.to_string()))?,
    )?;
    let assert_tensor = tensor_is_tgc(&spec);
    let max_atoms = config.params.max_atoms.unwrap_or(8);
    let length = config.params.length.unwrap_or(DEFAULT_SEQUENCE_LENGTH);
    if length < 2 {
        return Err(config_error("params.length must be at least 2"));
    }
    let settings = ProbeSettings::<f64>::default();
    Ok(Box::new(move |trial, seed| {
        let mut r = rng(seed);
        let n = r.gen_range(2..=max_atoms);
        let space = SampleSpace::<f64>::indexed(n)?;
        let limit_f = (0..order)
            .map(|_| random_function(&mut r, &space, 2.0))
            .collect::<Result<Vec<_>, _>>()?;
        let mass = r.gen_range(0.5..2.0);
        let limit_mu = random_measure(&mut r, &space, mass)?;
        let df = (0..order)
            .map(|_| random_function(&mut r, &space, 1.0))
            .collect::<Result<Vec<_>, _>>()?;
        let dmu: Vec<f64> = random_vector(&mut r, n, -0.5, 0.5);
        let rate = r.gen_range(0.3..0.8);
        let seq = (1..=length)
            .map(|m| {
                let h = f64::powi(rate, m as i32);
                let fs = limit_f
                    .iter()
                    .zip(&df)
                    .map(|(f, d)| f.add(&d.scale(h)))
                    .collect::<Result<Vec<_>, _>>()?;
                let values = limit_mu
                    .values()
                    .iter()
                    .zip(&dmu)
                    .map(|(v, d)| v * (1.0 + h * d))
                    .collect();
                MixedPoint::new(fs, Measure::new(space.clone(), values)?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let limit = MixedPoint::new(limit_f.clone(), limit_mu.clone())?;
        let mut bank: Vec<TestFunction<f64>> = (0..n).map(|i| TestFunction::indicator(&space, i)).collect();
        bank.push(TestFunction::constant(&space, 1.0));
        let banks = ProbeBanks {
            approximant: limit_f.clone(),
            test_bank: bank,
        };
        let m = r.gen_range(1..=n);
        let kappa = infogeom::sampling::random_surjective_statistic(&mut r, &space, m)?;
        let probe = pushforward_map_continuity_probe(&kappa, &seq, &limit, &banks, &settings, None)?;
        let inputs = json!({
            "limit_f": limit_f.iter().map(|f| f.values().to_vec()).collect::<Vec<_>>(),
            "limit_mu": limit_mu.values(),
            "df": df.iter().map(|f| f.values().to_vec()).collect::<Vec<_>>(),
            "dmu": dmu,
            "rate": rate,
            "length": length,
            "statistic": kappa.assignment(),
        });
        let mut rec = Record::new("continuity", trial, seed, &inputs);
        let flag = |b: bool| f64::from(u8::from(b));
        rec.set("source_converged", flag(probe.source.converged))
            .set("image_converged", flag(probe.image.converged))
            .set("weak_deviation", probe.source.weak_deviation.clone())
            .set("function_deviation", probe.source.function_deviation.clone());
        let mut tensor_ok = true;
        if probe.source.converged {
            let strong = strong_continuity_probe(&tensor, &seq, &limit, &probe.source, None)?;
            rec.set("tensor_values", strong.values.clone())
                .set("limit_value", strong.limit_value)
                .set("max_tail_deviation", strong.max_tail_deviation)
                .set("modulus", strong.modulus)
                .set("tensor_within_modulus", flag(strong.holds));
            tensor_ok = strong.holds || !assert_tensor;
        }
        let ok = probe.contract_holds && tensor_ok;
        let verdict = if !probe.source.converged {
            "source not converged at scale"
        } else if !probe.contract_holds {
            "image sequence not converged"
        } else if !tensor_ok {
            "tensor values leave the modulus bound"
        } else {
            "image and tensor values converge"
        };
        rec.assert(ok, verdict);
        Ok(rec)
    }))
}

fn integrability(config: &SuiteConfig) -> Result<Trial, ConfigError> {
    let spec = config.model.clone().unwrap_or(ModelSpec::HeavyTail {
        k: 2.0,
        panels: None,
        order: None,
        cutoff: None,
    });
    let model = build_model(&spec)?.model;
    let dim = model.param_dim();
    let k = config.params.k.unwrap_or(2.0);
    if !(k > 0.0) {
        return Err(config_error("params.k must be positive"));
    }
    let path: Vec<Vec<f64>> = match &config.params.path {
        Some(p) => {
            if p.from.len() != dim || p.to.len() != dim || p.steps == 0 {
                return Err(config_error(format!(
                    "params.path needs {dim}-dimensional endpoints and steps ≥ 1"
                )));
            }
            (0..=p.steps)
                .map(|i| {
                    let s = i as f64 / p.steps as f64;
                    p.from.iter().zip(&p.to).map(|(a, b)| a + s * (b - a)).collect()
                })
                .collect()
        }
        None if dim == 1 => (0..=49).map(|i| vec![0.02 + 0.98 * i as f64 / 49.0]).collect(),
        None => return Err(config_error("params.path is required for multi-parameter models")),
    };
    if let Some(x) = path.iter().find(|x| !model.domain().contains(x)) {
        return Err(config_error(format!("path point {x:?} lies outside the model domain")));
    }
    let direction = config.params.direction.clone().unwrap_or_else(|| vec![1.0; dim]);
    if direction.len() != dim {
        return Err(config_error(format!("params.direction needs {dim} entries")));
    }
    Ok(Box::new(move |trial, seed| {
        let scan = integrability_scan(&model, &path, &direction, k)?;
        let inputs = json!({"model": model.name(), "path": path, "direction": direction, "k": k});
        let mut rec = Record::new("integrability_scan", trial, seed, &inputs);
        rec.set("x", path.iter().map(|x| x[0]).collect::<Vec<_>>())
            .set("norms", scan.norms.clone())
            .set("k", k)
            .set("max_jump", scan.max_jump)
            .set("refined_max_jump", scan.refined_max_jump);
        rec.report_only(scan.verdict);
        Ok(rec)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(suite: Suite, text: &str) -> Vec<Record> {
        let config = SuiteConfig::parse(text).unwrap();
        let tol = config.resolved_tolerances().unwrap();
        plan(suite, &config, tol).unwrap().execute().unwrap()
    }

    #[test]
    fn small_runs_of_every_suite() {
        for (suite, text, expect_pass) in [
            (Suite::Monotonicity, r#"{"trials": 5, "seed": 1}"#, true),
            (Suite::Sufficiency, r#"{"trials": 5, "seed": 1}"#, true),
            (Suite::Contraction, r#"{"trials": 5, "seed": 1}"#, true),
            (Suite::Chentsov, r#"{"trials": 5, "seed": 1}"#, true),
            (
                Suite::Chentsov,
                r#"{"trials": 5, "seed": 1, "tensor": {"kind": "euclidean"}, "params": {"min_blocks": 2}}"#,
                false,
            ),
            (
                Suite::Uniqueness,
                r#"{"trials": 1, "params": {"nodes": 256, "levels": 6}}"#,
                true,
            ),
            (Suite::Continuity, r#"{"trials": 3, "seed": 1}"#, true),
            (Suite::Integrability, r#"{"trials": 3}"#, true),
        ] {
            let records = run(suite, text);
            assert!(!records.is_empty());
            assert_eq!(records.iter().all(|r| r.passed), expect_pass, "{suite:?} {text}");
            assert!(records.windows(2).all(|w| w[0].trial < w[1].trial));
        }
    }

    #[test]
    fn entangled_model_fails_sufficiency() {
        let records = run(
            Suite::Sufficiency,
            r#"{"trials": 4, "model": {"kind": "factorized", "params": {"q": {"kind": "bernoulli"}, "r": [0.5, 0.5], "perturbation": 0.8}}}"#,
        );
        assert!(records.iter().any(|r| !r.passed));
    }

    #[test]
    fn grid_models_are_rejected_for_finite_suites() {
        let config = SuiteConfig::parse(r#"{"model": {"kind": "heavy_tail", "params": {"k": 2}}}"#).unwrap();
        let tol = config.resolved_tolerances().unwrap();
        assert!(plan(Suite::Monotonicity, &config, tol).is_err());
    }
}
