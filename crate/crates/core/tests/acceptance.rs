//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use infogeom::measure::{
    dirac_approximate, integrate, CellPartition, Measure, SampleSpace, StepFunction, TestFunction,
};
use infogeom::model::{ParametrizedModel, TangentDirection};
use infogeom::quadrature::adaptive_integrate_to_infinity;
use infogeom::sampling::{
    random_embedding, random_function, random_masses, random_measure, random_permutation, random_surjective_statistic,
    random_tangent, random_unit_tangent, random_vector, rng, trial_seed,
};
use infogeom::statistic::{contraction_report, Statistic};
use infogeom::tensor::{fisher, CovariantTensorField, WeakFunctional, Weight};
use infogeom::topology::{holder_bound_check, pushforward_map_continuity_probe, MixedPoint, ProbeBanks, ProbeSettings};
use infogeom::verify::{
    chentsov_invariance_residual, dyadic_partitions, monotonicity_check, reference_independence_check,
    sufficiency_check, uniqueness_limit_probe, CongruentEmbedding,
};
use infogeom::zoo;
use rand::Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

fn bernoulli_fisher() -> Outcome {
    let m = zoo::bernoulli::<f64>().map_err(fail)?;
    let mut worst = 0.0_f64;
    for i in 1..10 {
        let x = i as f64 / 10.0;
        let g = fisher(&m, &[x], &[1.0], &[1.0]).map_err(fail)?;
        worst = worst.max((g - 1.0 / (x * (1.0 - x))).abs());
    }
    ensure(
        worst <= 1e-12,
        format!("max |g − 1/(x(1−x))| = {worst:.3e} over x = 0.1..0.9"),
    )
}

fn monotonicity() -> Outcome {
    let mut worst = f64::INFINITY;
    for trial in 0..1000 {
        let mut r = rng(trial_seed(2024, trial));
        let n = r.gen_range(2..=8);
        let model = zoo::categorical::<f64>(n).map_err(fail)?;
        let m = r.gen_range(1..=n);
        let kappa = random_surjective_statistic(&mut r, model.space(), m).map_err(fail)?;
        let x = zoo::categorical_coordinates(&random_masses::<f64>(&mut r, n)).map_err(fail)?;
        let v = random_vector(&mut r, n - 1, -1.0, 1.0);
        let rep = monotonicity_check(&model, &kappa, &x, &v).map_err(fail)?;
        worst = worst.min(rep.loss);
        if rep.loss < -1e-10 {
            return Err(format!("trial {trial}: loss {:.3e} ({})", rep.loss, rep.context));
        }
    }
    Ok(format!("1000 trials, min loss = {worst:.3e}"))
}

fn contraction() -> Outcome {
    let mut worst = f64::INFINITY;
    for trial in 0..1000 {
        let mut r = rng(trial_seed(7, trial));
        let n = r.gen_range(2..=12);
        let space = SampleSpace::<f64>::indexed(n).map_err(fail)?;
        let m = r.gen_range(1..=n);
        let kappa = random_surjective_statistic(&mut r, &space, m).map_err(fail)?;
        let amplitude = r.gen_range(0.1..10.0);
        let f = random_function(&mut r, &space, amplitude).map_err(fail)?;
        let mu_arg = r.gen_range(0.1..10.0);
        let mu = random_measure(&mut r, &space, mu_arg).map_err(fail)?;
        let p = r.gen_range(2..=4) as f64;
        let rep = contraction_report(&kappa, &f, &mu, p).map_err(fail)?;
        let slack = rep.norm_before + 1e-12 - rep.norm_after;
        worst = worst.min(rep.norm_before - rep.norm_after);
        if slack < 0.0 {
            return Err(format!(
                "trial {trial}: ‖κ_*f‖ = {} > ‖f‖ = {}",
                rep.norm_after, rep.norm_before
            ));
        }
    }
    Ok(format!("1000 trials, min ‖f‖ − ‖κ_*f‖ = {worst:.3e}"))
}

fn sufficiency() -> Outcome {
    let xs: Vec<Vec<f64>> = (1..10).map(|i| vec![i as f64 / 10.0]).collect();
    let vs = vec![vec![1.0], vec![-0.5], vec![2.0]];
    let q = zoo::bernoulli::<f64>().map_err(fail)?;
    let mut worst = 0.0_f64;
    for r in [vec![0.5, 0.5], vec![0.2, 0.3, 0.5], vec![1.0, 4.0]] {
        let fm = zoo::factorized(&q, r).map_err(fail)?;
        let rep = sufficiency_check(&fm.model, &fm.projection, &xs, &vs).map_err(fail)?;
        worst = worst.max(rep.max_abs_loss);
    }
    let mut nonzero = 0;
    for trial in 0..100 {
        let mut r = rng(trial_seed(99, trial));
        let n = r.gen_range(2..=8);
        let model = zoo::categorical::<f64>(n).map_err(fail)?;
        let kappa = random_permutation(&mut r, model.space()).map_err(fail)?;
        let x = zoo::categorical_coordinates(&random_masses::<f64>(&mut r, n)).map_err(fail)?;
        let v = random_vector(&mut r, n - 1, -1.0, 1.0);
        if monotonicity_check(&model, &kappa, &x, &v).map_err(fail)?.loss != 0.0 {
            nonzero += 1;
        }
    }
    ensure(
        worst <= 1e-10 && nonzero == 0,
        format!("factorized max|loss| = {worst:.3e} on 9×3 grids; bijections with nonzero loss: {nonzero}/100"),
    )
}

fn dirac_approximation() -> Outcome {
    let space = SampleSpace::<f64>::uniform_grid(0.0, 1.0, 720).map_err(fail)?;
    let mut worst_integral = 0.0_f64;
    let mut mass_exact = true;
    for trial in 0..50 {
        let mut r = rng(trial_seed(5, trial));
        let mu_arg = r.gen_range(0.5..3.0);
        let mu = random_measure(&mut r, &space, mu_arg).map_err(fail)?;
        let generators = [3usize, 8, 20]
            .iter()
            .map(|&cells| {
                let f = random_function(&mut r, &space, 2.0)?;
                StepFunction::cell_average(CellPartition::uniform(&space, cells)?, &f, &mu)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(fail)?;
        let nu = dirac_approximate(&mu, &generators).map_err(fail)?;
        for g in &generators {
            let (a, b) = (g.integrate(&nu).map_err(fail)?, g.integrate(&mu).map_err(fail)?);
            worst_integral = worst_integral.max((a - b).abs());
        }
        // Regrouping a floating-point sum by cells moves it by a few ulps at most.
        mass_exact &= (nu.mass() - mu.mass()).abs() <= 4.0 * f64::EPSILON * mu.mass();
    }
    let uniform = Measure::reference(&space);
    let f = TestFunction::from_fn(&space, |t| t).map_err(fail)?;
    let mut level_ok = true;
    let mut worst_level = 0.0_f64;
    for (level, partition) in dyadic_partitions(&space, 9).map_err(fail)?.into_iter().enumerate() {
        let step = StepFunction::cell_average(partition, &f, &uniform).map_err(fail)?;
        let nu = dirac_approximate(&uniform, &[step]).map_err(fail)?;
        let err = (integrate(&f, &nu).map_err(fail)? - 0.5).abs();
        let half_width = 0.5 / (1u64 << level) as f64;
        worst_level = worst_level.max(err / half_width);
        level_ok &= err <= half_width;
    }
    ensure(
        worst_integral <= 1e-12 && mass_exact && level_ok,
        format!(
            "generator error {worst_integral:.3e}; mass preserved to rounding: {mass_exact}; max |∫t dν − ½|/(half width) = {worst_level:.3e}"
        ),
    )
}

fn uniqueness() -> Outcome {
    let space = SampleSpace::<f64>::uniform_grid(0.0, 1.0, 4096).map_err(fail)?;
    let mu = Measure::reference(&space);
    let f = TestFunction::from_fn(&space, |t| t).map_err(fail)?;
    let parts = dyadic_partitions(&space, 10).map_err(fail)?;
    let t11 = CovariantTensorField::<f64>::canonical(2).map_err(fail)?;
    let fisher_run = uniqueness_limit_probe(&t11, &mu, &f, &parts, None).map_err(fail)?;
    let weighted = CovariantTensorField::tgc(
        2,
        Weight::Monomial {
            coefficient: 1.0,
            power: 1,
        },
        WeakFunctional::constant(1.0),
    )
    .map_err(fail)?;
    let contrast = uniqueness_limit_probe(&weighted, &mu, &f, &parts, None).map_err(fail)?;
    let a = *fisher_run.values.last().unwrap();
    let b = *contrast.values.last().unwrap();
    ensure(
        (a - 1.0 / 3.0).abs() <= 1e-3
            && (b - 0.25).abs() <= 1e-3
            && !contrast.agrees_with_fisher
            && fisher_run.monotone,
        format!(
            "1024 cells: T_1,1 → {a:.9} (|Δ| = {:.2e}), T_t,1 → {b:.9} (|Δ| = {:.2e}); monotone: {}",
            (a - 1.0 / 3.0).abs(),
            (b - 0.25).abs(),
            fisher_run.monotone
        ),
    )
}

fn chentsov() -> Outcome {
    let fisher_form = CovariantTensorField::<f64>::canonical(2).map_err(fail)?;
    let euclid = CovariantTensorField::<f64>::euclidean();
    let trials = 500;
    // Every source atom is split, so each direction feels the refinement.
    let mut worst = 0.0_f64;
    let mut separated = 0;
    for trial in 0..trials {
        let mut r = rng(trial_seed(31, trial));
        let n = r.gen_range(2..=6);
        let mu = Measure::new(SampleSpace::indexed(n).map_err(fail)?, random_masses(&mut r, n)).map_err(fail)?;
        let u: Vec<f64> = random_unit_tangent(&mut r, n);
        let k = random_embedding(&mut r, n, 2).map_err(fail)?;
        worst = worst.max(
            chentsov_invariance_residual(&fisher_form, &k, &mu, &u)
                .map_err(fail)?
                .abs(),
        );
        if chentsov_invariance_residual(&euclid, &k, &mu, &u).map_err(fail)?.abs() > 1e-2 {
            separated += 1;
        }
    }
    // Embeddings that may leave atoms whole, and pure relabellings, for Fisher.
    for trial in 0..trials {
        let mut r = rng(trial_seed(32, trial));
        let n = r.gen_range(2..=6);
        let mu = Measure::new(SampleSpace::indexed(n).map_err(fail)?, random_masses(&mut r, n)).map_err(fail)?;
        let u: Vec<f64> = random_tangent(&mut r, n);
        let k = if trial % 2 == 0 {
            random_embedding(&mut r, n, 1).map_err(fail)?
        } else {
            let perm = random_permutation(&mut r, mu.space()).map_err(fail)?;
            let splits = perm.assignment().iter().map(|&j| vec![(j, 1.0)]).collect();
            CongruentEmbedding::new(n, splits).map_err(fail)?
        };
        worst = worst.max(
            chentsov_invariance_residual(&fisher_form, &k, &mu, &u)
                .map_err(fail)?
                .abs(),
        );
    }
    let share = separated as f64 / trials as f64;
    ensure(
        worst <= 1e-10 && share >= 0.99,
        format!(
            "Fisher max |residual| = {worst:.3e} over {} embeddings; Euclidean |residual| > 1e-2 on {separated}/{trials}",
            2 * trials
        ),
    )
}

fn holder() -> Outcome {
    let mut worst = f64::INFINITY;
    for trial in 0..1000 {
        let mut r = rng(trial_seed(17, trial));
        let space = if r.gen_bool(0.5) {
            SampleSpace::<f64>::indexed(r.gen_range(1..=10))
        } else {
            SampleSpace::<f64>::uniform_grid(0.0, r.gen_range(0.5..4.0), 64)
        }
        .map_err(fail)?;
        let f_arg = r.gen_range(0.1..5.0);
        let f = random_function(&mut r, &space, f_arg).map_err(fail)?;
        let mu_arg = r.gen_range(0.1..5.0);
        let mu = random_measure(&mut r, &space, mu_arg).map_err(fail)?;
        let (p, k) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let rep = holder_bound_check(&f, &mu, p, k).map_err(fail)?;
        worst = worst.min(rep.slack);
        if rep.slack < -1e-12 {
            return Err(format!("trial {trial}: slack {:.3e}", rep.slack));
        }
    }
    let mut worst_eq = 0.0_f64;
    for trial in 0..100 {
        let mut r = rng(trial_seed(18, trial));
        let space = SampleSpace::<f64>::indexed(r.gen_range(1..=10)).map_err(fail)?;
        let f = TestFunction::constant(&space, r.gen_range(-3.0..3.0));
        let mu_arg = r.gen_range(0.1..5.0);
        let mu = random_measure(&mut r, &space, mu_arg).map_err(fail)?;
        let rep = holder_bound_check(&f, &mu, r.gen_range(1..=4), r.gen_range(1..=4)).map_err(fail)?;
        worst_eq = worst_eq.max(rep.slack.abs());
    }
    ensure(
        worst_eq <= 1e-12,
        format!("1000 trials, min slack = {worst:.3e}; constant f max |slack| = {worst_eq:.3e}"),
    )
}

fn heavy_tail_closed_form() -> Outcome {
    let mut worst = 0.0_f64;
    for k in [2.0, 3.0] {
        let model = zoo::heavy_tail::<f64>(k).map_err(fail)?;
        for i in 0..=19 {
            let x = 0.05 + 0.95 * i as f64 / 19.0;
            let e1 = adaptive_integrate_to_infinity(|u: f64| (-u).exp() / u, x * x, 1e-15, 1e-13, 10_000)
                .map_err(fail)?
                .value;
            let oracle = k * (2.0 * x).powf(k) * e1;
            let got = model
                .integrability_norm(&TangentDirection::scalar(x, 1.0), k)
                .map_err(fail)?
                .powf(k);
            worst = worst.max((got - oracle).abs() / oracle);
        }
    }
    ensure(
        worst <= 1e-6,
        format!("max relative error of ‖score‖ᵏ = {worst:.3e} (x ∈ [0.05, 1], k ∈ {{2, 3}})"),
    )
}

fn reference_independence() -> Outcome {
    let mut worst = 0.0_f64;
    let models = [
        zoo::bernoulli::<f64>().map_err(fail)?,
        zoo::categorical::<f64>(4).map_err(fail)?,
    ];
    for (mi, model) in models.iter().enumerate() {
        for trial in 0..10 {
            let mut r = rng(trial_seed(50 + mi as u64, trial));
            let n = model.space().len();
            let phi =
                TestFunction::new(model.space().clone(), random_vector(&mut r, n, 0.1, 10.0), true).map_err(fail)?;
            let d = model.param_dim();
            let xs: Vec<Vec<f64>> = (0..5)
                .map(|_| {
                    if mi == 0 {
                        vec![r.gen_range(0.05..0.95)]
                    } else {
                        random_vector(&mut r, d, -2.0, 2.0)
                    }
                })
                .collect();
            let vs: Vec<Vec<f64>> = (0..3).map(|_| random_vector(&mut r, d, -1.0, 1.0)).collect();
            let rep = reference_independence_check(model, &phi, &xs, &vs).map_err(fail)?;
            worst = worst.max(rep.max_deviation());
        }
    }
    ensure(
        worst <= 1e-10,
        format!("max Fisher/Amari–Chentsov deviation = {worst:.3e} over 2×10 rescalings"),
    )
}

struct ScorePoint {
    model: ParametrizedModel<f64>,
    points: Vec<TangentDirection<f64>>,
}

fn smooth_zoo() -> Result<Vec<ScorePoint>, infogeom::Error> {
    let scalar = |xs: &[f64]| -> Vec<TangentDirection<f64>> {
        xs.iter()
            .flat_map(|&x| [TangentDirection::scalar(x, 1.0), TangentDirection::scalar(x, -0.7)])
            .collect()
    };
    let bern = zoo::bernoulli::<f64>()?;
    let space = SampleSpace::<f64>::indexed(5)?;
    let reference = Measure::new(space.clone(), vec![1.0, 0.5, 2.0, 1.5, 0.25])?;
    let t = TestFunction::new(space, vec![-1.0, 0.0, 0.5, 2.0, 3.0], true)?;
    let grid = SampleSpace::<f64>::gauss_legendre_grid(-1.0, 2.0, 16, 8)?;
    let tg = TestFunction::from_fn(&grid, |s| s * s)?;
    let mut r = rng(4);
    let mut cat = Vec::new();
    for n in [2, 3, 5, 8] {
        let model = zoo::categorical::<f64>(n)?;
        let points = (0..4)
            .map(|_| {
                TangentDirection::new(
                    random_vector(&mut r, n - 1, -2.0, 2.0),
                    random_vector(&mut r, n - 1, -1.0, 1.0),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        cat.push(ScorePoint { model, points });
    }
    let mut out = vec![
        ScorePoint {
            points: scalar(&[0.1, 0.3, 0.5, 0.7, 0.9]),
            model: bern.clone(),
        },
        ScorePoint {
            points: scalar(&[0.2, 0.6]),
            model: zoo::factorized(&bern, vec![0.2, 0.8])?.model,
        },
        ScorePoint {
            points: scalar(&[0.2, 0.6]),
            model: zoo::entangled(&bern, vec![0.2, 0.3, 0.5], 0.8)?.model,
        },
        ScorePoint {
            points: scalar(&[-1.0, 0.05, 0.4, 1.0]),
            model: zoo::heavy_tail::<f64>(2.0)?,
        },
        ScorePoint {
            points: scalar(&[-1.0, 0.05, 0.4, 1.0]),
            model: zoo::heavy_tail::<f64>(3.0)?,
        },
        ScorePoint {
            points: scalar(&[-1.5, 0.0, 0.8]),
            model: zoo::exponential_family(reference, t)?,
        },
        ScorePoint {
            points: scalar(&[-0.5, 0.3]),
            model: zoo::exponential_family(Measure::reference(&grid), tg)?,
        },
    ];
    out.extend(cat);
    Ok(out)
}

fn score_fidelity() -> Outcome {
    let mut worst_rel = 0.0_f64;
    let mut worst_mean = 0.0_f64;
    let mut count = 0;
    for zp in smooth_zoo().map_err(fail)? {
        for td in &zp.points {
            let a = zp.model.score(td, None).map_err(fail)?;
            let f = zp.model.finite_difference_score(td, None).map_err(fail)?;
            let scale = a.sup_norm().max(f64::MIN_POSITIVE);
            let dev = a
                .values()
                .iter()
                .zip(f.values())
                .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            worst_rel = worst_rel.max(dev / scale);
            if zp.model.is_statistical() {
                let p = zp.model.density_at(&td.point).map_err(fail)?;
                worst_mean = worst_mean.max(integrate(&a, &p).map_err(fail)?.abs());
            }
            count += 1;
        }
    }
    ensure(
        worst_rel <= 1e-6 && worst_mean <= 1e-8,
        format!("{count} points: max relative |analytic − FD| = {worst_rel:.3e}; max |∫score dp| = {worst_mean:.3e}"),
    )
}

fn pushforward_continuity() -> Outcome {
    let settings = ProbeSettings::<f64>::default();
    let mut flagged = 0;
    let mut image_ok = 0;
    for trial in 0..200 {
        let mut r = rng(trial_seed(12, trial));
        let n = r.gen_range(2..=8);
        let space = SampleSpace::<f64>::indexed(n).map_err(fail)?;
        let slots = r.gen_range(1..=3);
        let limit_f: Vec<TestFunction<f64>> = (0..slots)
            .map(|_| random_function(&mut r, &space, 2.0))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        let limit_mu_arg = r.gen_range(0.5..2.0);
        let limit_mu = random_measure(&mut r, &space, limit_mu_arg).map_err(fail)?;
        let df: Vec<TestFunction<f64>> = (0..slots)
            .map(|_| random_function(&mut r, &space, 1.0))
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        let dmu: Vec<f64> = random_vector(&mut r, n, -0.5, 0.5);
        let rate = r.gen_range(0.3..0.8);
        let seq = (1..=80)
            .map(|m| {
                let h = f64::powi(rate, m);
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
            .collect::<Result<Vec<_>, _>>()
            .map_err(fail)?;
        let limit = MixedPoint::new(limit_f.clone(), limit_mu).map_err(fail)?;
        let mut bank: Vec<TestFunction<f64>> = (0..n).map(|i| TestFunction::indicator(&space, i)).collect();
        bank.push(TestFunction::constant(&space, 1.0));
        let banks = ProbeBanks {
            approximant: limit_f,
            test_bank: bank,
        };
        let kappa_arg = r.gen_range(1..=n);
        let kappa: Statistic<f64> = random_surjective_statistic(&mut r, &space, kappa_arg).map_err(fail)?;
        let rep = pushforward_map_continuity_probe(&kappa, &seq, &limit, &banks, &settings, None).map_err(fail)?;
        if rep.source.converged {
            flagged += 1;
            if rep.image.converged {
                image_ok += 1;
            }
        }
    }
    ensure(
        flagged == 200 && image_ok == flagged,
        format!("{flagged}/200 source sequences converged; images converged: {image_ok}/{flagged}"),
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "Bernoulli Fisher metric",
            budget: Some(Duration::from_secs(1)),
            run: bernoulli_fisher,
        },
        Criterion {
            id: 2,
            name: "monotonicity under statistics",
            budget: Some(Duration::from_secs(10)),
            run: monotonicity,
        },
        Criterion {
            id: 3,
            name: "conditional expectation contraction",
            budget: Some(Duration::from_secs(10)),
            run: contraction,
        },
        Criterion {
            id: 4,
            name: "sufficiency invariance",
            budget: Some(Duration::from_secs(5)),
            run: sufficiency,
        },
        Criterion {
            id: 5,
            name: "Dirac approximation",
            budget: None,
            run: dirac_approximation,
        },
        Criterion {
            id: 6,
            name: "uniqueness limiting procedure",
            budget: Some(Duration::from_secs(5)),
            run: uniqueness,
        },
        Criterion {
            id: 7,
            name: "Chentsov invariance contrast",
            budget: Some(Duration::from_secs(5)),
            run: chentsov,
        },
        Criterion {
            id: 8,
            name: "Hölder embedding bound",
            budget: None,
            run: holder,
        },
        Criterion {
            id: 9,
            name: "heavy-tail closed form",
            budget: None,
            run: heavy_tail_closed_form,
        },
        Criterion {
            id: 10,
            name: "reference independence",
            budget: None,
            run: reference_independence,
        },
        Criterion {
            id: 11,
            name: "score fidelity",
            budget: None,
            run: score_fidelity,
        },
        Criterion {
            id: 12,
            name: "pushforward continuity contract",
            budget: None,
            run: pushforward_continuity,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let over_budget = c.budget.is_some_and(|b| elapsed > b);
        let (status, detail) = match outcome {
            Ok(d) if !over_budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; exceeded {:?}", c.budget.unwrap())),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "{status} [{:>2}] {}: {detail} ({:.3} s)",
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
