//! `infogeom`: runs verification suites and extracts plot data from reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod report;
mod specs;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use config::{ConfigError, Suite, SuiteConfig};
use report::Report;

const EXIT_VIOLATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "infogeom",
    version,
    about = "Numerical checks of the Fisher metric and its invariance properties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write `<suite>.json` and `<suite>.csv`.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Suite configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the configured trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Output directory; defaults to the configured one, else `reports`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, env = "INFOGEOM_JOBS", default_value_t = 0)]
        jobs: usize,
    },
    /// Write a two-column `(index, value)` CSV of one report quantity.
    PlotData {
        report: PathBuf,
        quantity: String,
        /// Record whose series is extracted; defaults to the first.
        #[arg(long)]
        trial: Option<u64>,
        /// Output file; defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the JSON schema of suite configurations.
    Schema,
}

enum Failure {
    Config(ConfigError),
    Internal(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

struct VerifyArgs {
    suite: Suite,
    config: PathBuf,
    seed: Option<u64>,
    trials: Option<u64>,
    out: Option<PathBuf>,
    jobs: usize,
}

fn verify(args: VerifyArgs) -> Result<Report, Failure> {
    let mut config = SuiteConfig::load(&args.config)?;
    if let Some(s) = config.suite.filter(|s| *s != args.suite) {
        return Err(ConfigError(format!("config is for suite {}, not {}", s.name(), args.suite.name())).into());
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    config.suite = Some(args.suite);
    config.validate()?;
    let tol = config.resolved_tolerances()?;
    let plan = suites::plan(args.suite, &config, tol)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building the worker pool")?;
    let records = pool.install(|| plan.execute()).context("running trials")?;
    let mut canonical = serde_json::to_value(&config).context("serializing the config")?;
    canonical["tolerances"] = serde_json::to_value(tol).context("serializing tolerances")?;
    let report = Report::new(args.suite.name(), config.seed, config.trials, &canonical, records);
    let out = args
        .out
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("reports"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    report.write_json(&out.join(format!("{}.json", report.suite)))?;
    report.write_csv(&out.join(format!("{}.csv", report.suite)))?;
    Ok(report)
}

fn plot_data(report: PathBuf, quantity: &str, trial: Option<u64>, out: Option<PathBuf>) -> anyhow::Result<()> {
    let report = Report::load(&report)?;
    let rows = report::plot_data(&report, quantity, trial)?;
    match out {
        Some(path) => {
            let file = std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
            report::write_plot_csv(&rows, file)
        }
        None => report::write_plot_csv(&rows, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify {
            suite,
            config,
            seed,
            trials,
            out,
            jobs,
        } => match verify(VerifyArgs {
            suite,
            config,
            seed,
            trials,
            out,
            jobs,
        }) {
            Ok(report) => {
                let asserted = report.records.iter().filter(|r| r.asserted).count();
                match report.first_violation() {
                    None => {
                        println!(
                            "{}: {} records, {asserted} asserted, 0 violations",
                            report.suite,
                            report.records.len()
                        );
                        ExitCode::SUCCESS
                    }
                    Some(r) => {
                        eprintln!(
                            "{}: {} of {asserted} asserted checks violated; first: trial {} seed {} inputs {} ({})",
                            report.suite, report.violations, r.trial, r.seed, r.inputs_digest, r.verdict
                        );
                        ExitCode::from(EXIT_VIOLATION)
                    }
                }
            }
            Err(Failure::Config(e)) => {
                eprintln!("config error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
            Err(Failure::Internal(e)) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_INTERNAL)
            }
        },
        Command::PlotData {
            report,
            quantity,
            trial,
            out,
        } => match plot_data(report, &quantity, trial, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Schema => {
            print!("{}", config::SCHEMA);
            ExitCode::SUCCESS
        }
    }
}
