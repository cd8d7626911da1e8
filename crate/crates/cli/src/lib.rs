//! Command-line front end: configuration, body-spec ingestion, report
//! files and the acceptance suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod suite;

use std::path::PathBuf;
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand};
use serde_json::Value;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use report::Outcome;

use commands::{CommandOutput, ModeArg, SectionMethodArg, TheoremArgs, Which};
use report::{unix_ms, Budget, Meta, Report, Table, ARTIFACT_VERSION};

/// Suite wall-clock target, reported in the metadata file.
pub const SUITE_BUDGET_SECONDS: f64 = 900.0;

#[derive(Debug, Parser)]
#[command(name = "cbp", version, about = "Sections, volumes and comparison checks for rotation-invariant convex bodies")]
pub struct Cli {
    /// JSON run configuration; defaults apply to every missing field.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the report files (overrides the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides the configuration; CBP_THREADS overrides both).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Do not write report files.
    #[arg(long, global = true)]
    pub no_write: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check homogeneity, rotation invariance and convexity of a body.
    Validate {
        /// Body-spec file, or an inline JSON object.
        body: String,
    },
    /// Section volumes by the direct and/or the Fourier route.
    Section {
        body: String,
        /// Comma-separated direction, normalized on input.
        #[arg(long)]
        xi: Option<String>,
        /// Number of seeded random directions.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        method: SectionMethodArg,
    },
    /// Volume by quadrature, with closed form and optional Monte Carlo.
    Volume {
        body: String,
        #[arg(long)]
        monte_carlo: bool,
    },
    /// Sphere values of the Fourier transform of ‖·‖^{-p}.
    Ft {
        body: String,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// One comparison check.
    Theorem {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        l: Option<String>,
        /// Exponent for the Parseval pairing (default 2n - 2).
        #[arg(long)]
        p: Option<f64>,
        /// Use this ε in the stability hypothesis instead of the computed gap.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long, value_enum, default_value = "assert")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-2)]
        parseval_bound: f64,
    },
    /// Run every acceptance criterion.
    Suite,
}

fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    config.check()?;
    Ok(config)
}

fn dispatch(command: &Command, config: &RunConfig) -> CliResult<CommandOutput> {
    let s = &config.settings;
    match command {
        Command::Validate { body } => commands::validate(&commands::load_body(body)?, s),
        Command::Section { body, xi, grid, method } => {
            let body = commands::load_body(body)?;
            let dirs = commands::directions(&body, xi.as_deref(), *grid, s.seed)?;
            commands::section(&body, &dirs, *method, s)
        }
        Command::Volume { body, monte_carlo } => commands::volume(&commands::load_body(body)?, s, *monte_carlo),
        Command::Ft { body, p, xi, grid } => {
            let body = commands::load_body(body)?;
            let dirs = commands::directions(&body, xi.as_deref(), *grid, s.seed)?;
            commands::ft(&body, *p, &dirs, s)
        }
        Command::Theorem { which, k, l, p, epsilon, n_max, mode, parseval_bound } => {
            let args = TheoremArgs {
                k: k.as_deref().map(commands::load_body).transpose()?,
                l: l.as_deref().map(commands::load_body).transpose()?,
                p: *p,
                epsilon: *epsilon,
                n_max: *n_max,
                exploratory: *mode == ModeArg::Exploratory,
                parseval_bound: *parseval_bound,
            };
            commands::theorem(*which, &args, s)
        }
        Command::Suite => {
            let report = suite::run_suite(s)?;
            Ok(CommandOutput {
                stem: "suite".into(),
                outcome: report.outcome,
                table: report.table(),
                summary: report.criteria.iter().map(|c| c.line()).collect(),
                result: serde_json::to_value(&report)?,
            })
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Validate { .. } => "validate",
        Command::Section { .. } => "section",
        Command::Volume { .. } => "volume",
        Command::Ft { .. } => "ft",
        Command::Theorem { .. } => "theorem",
        Command::Suite => "suite",
    }
}

/// Runs one command, prints its summary and writes the report files.
/// Errors are printed and mapped to [`Outcome::InvalidInput`].
pub fn run(cli: &Cli) -> Outcome {
    match try_run(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            Outcome::InvalidInput
        }
    }
}

fn try_run(cli: &Cli) -> CliResult<Outcome> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let config = resolve_config(cli)?;
    let threads = config.install_threads()?;
    let name = command_name(&cli.command);
    let output = dispatch(&cli.command, &config)?;
    for line in &output.summary {
        println!("{line}");
    }
    if !cli.no_write {
        let elapsed = clock.elapsed().as_secs_f64();
        let budget = matches!(cli.command, Command::Suite)
            .then_some(Budget { limit_seconds: SUITE_BUDGET_SECONDS, within: elapsed <= SUITE_BUDGET_SECONDS });
        let meta = Meta {
            artifact_version: ARTIFACT_VERSION,
            command: name,
            started_unix_ms: unix_ms(started),
            elapsed_seconds: elapsed,
            threads,
            budget,
        };
        let report = Report::new(name, &config, output.outcome, &output.result);
        let written = report::write_report(&config.output_dir, &output.stem, &report, &output.table, &meta)?;
        println!("report: {}", written.json.display());
    }
    println!("exit {}", output.outcome.code());
    Ok(output.outcome)
}

/// Result of a command without touching the filesystem; used by tests.
pub fn evaluate(command: &Command, config: &RunConfig) -> CliResult<(Outcome, Value, Table)> {
    config.check()?;
    let out = dispatch(command, config)?;
    Ok((out.outcome, out.result, out.table))
}
