//! Command-line front end for the `crosspoly` toolkit.
//!
//! Every command renders a [`report::Report`]: the effective configuration, the
//! seed (drawn from entropy when absent), the toolkit version, the result and a
//! runtime block. Exit codes are 0 on pass, 1 on a failed check, 2 on usage or
//! input errors.

pub mod commands;
pub mod report;
pub mod verify;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::report::{Report, Runtime, Table, SCHEMA, VERSION};

pub const CONSTANTS_ENV: &str = "CROSSPOLY_CONSTANTS";

#[derive(Debug, Parser)]
#[command(name = "crosspoly", version, about = "Gluskin polytope experiments and lemma checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Master seed; drawn from entropy and echoed when omitted.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo sample count (accepts `1e6`).
    #[arg(long, global = true, value_parser = parse_count)]
    pub samples: Option<u64>,
    /// Trial count (accepts `1e3`).
    #[arg(long, global = true, value_parser = parse_count)]
    pub trials: Option<u64>,
    /// Dimension; `params` accepts non-integers such as `1e12`.
    #[arg(short = 'n', long = "n", global = true, value_parser = parse_positive)]
    pub n: Option<f64>,
    #[arg(short = 'm', long = "m", global = true, value_parser = parse_count)]
    pub m: Option<u64>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// JSON constants file; the CROSSPOLY_CONSTANTS variable takes precedence.
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a Gaussian matrix Γ (n × m); the Gluskin polytope is Γ(B_1^m).
    Gen,
    /// Run one lemma check.
    Verify {
        #[arg(value_enum)]
        lemma: verify::Lemma,
        #[command(flatten)]
        knobs: verify::Knobs,
    },
    /// Balance point, constraint margins and running exponent fit over an n-grid.
    Sweep {
        /// Comma-separated grid, e.g. `1e4,1e5,1e6`.
        #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
        grid: Option<Vec<f64>>,
        /// Add the older large-U branch and its exponent.
        #[arg(long)]
        legacy_exponent: bool,
    },
    /// Heuristic Banach–Mazur distance to B_1^n with a witness map.
    BmEstimate {
        /// Matrix file from `gen` (or any `{dims, data}` JSON); otherwise a fresh Γ.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Derived parameters and constraint report at one n.
    Params,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] crosspoly::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        use crosspoly::Error as E;
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(E::InvalidInput(_) | E::Precondition(_) | E::DimensionMismatch { .. }) => 2,
            CliError::Core(_) => 1,
        }
    }
}

/// What a command hands back before the envelope is filled in.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: serde_json::Value,
    pub passed: bool,
    pub result: serde_json::Value,
    pub table: Option<Table>,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub report: Report,
    pub rendered: String,
    pub exit_code: i32,
}

pub fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(format!("expected a nonnegative integer, got {s}"));
    }
    Ok(v as u64)
}

pub fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("expected a positive number, got {s}"));
    }
    Ok(v)
}

impl Global {
    /// `-n` as an integer dimension.
    pub fn dim(&self, default: usize) -> Result<usize, CliError> {
        match self.n {
            None => Ok(default),
            Some(v) if v.fract() == 0.0 && v <= usize::MAX as f64 => Ok(v as usize),
            Some(v) => Err(CliError::usage(format!("-n must be an integer here, got {v}"))),
        }
    }

    pub fn cols(&self, default: usize) -> usize {
        self.m.map_or(default, |m| m as usize)
    }

    pub fn constants(&self) -> Result<crosspoly::params::Constants, CliError> {
        let path = std::env::var_os(CONSTANTS_ENV).map(PathBuf::from).or_else(|| self.constants.clone());
        match path {
            None => Ok(crosspoly::params::Constants::default()),
            Some(p) => {
                let text = read(&p)?;
                Ok(crosspoly::params::Constants::from_json(&text)?)
            }
        }
    }
}

pub(crate) fn read(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Gen => "gen".into(),
        Command::Verify { lemma, .. } => format!("verify {}", lemma.id()),
        Command::Sweep { .. } => "sweep".into(),
        Command::BmEstimate { .. } => "bm-estimate".into(),
        Command::Params => "params".into(),
    }
}

/// Runs a parsed command inside a pool of `--workers` threads and renders it.
pub fn execute(cli: &Cli) -> Result<Execution, CliError> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or_else(rand::random);
    let start = Instant::now();
    let outcome = crosspoly::rng::with_workers(g.workers, || -> Result<Outcome, CliError> {
        match &cli.command {
            Command::Gen => commands::gen(g, seed),
            Command::Verify { lemma, knobs } => verify::run(*lemma, knobs, g, seed),
            Command::Sweep { grid, legacy_exponent } => commands::sweep(g, grid.as_deref(), *legacy_exponent),
            Command::BmEstimate { input, restarts } => commands::bm_estimate(g, input.as_deref(), *restarts, seed),
            Command::Params => commands::params(g),
        }
    })?;
    let workers = if g.workers == 0 { rayon::current_num_threads() } else { g.workers };
    let report = Report {
        schema: SCHEMA,
        command: command_name(&cli.command),
        config: outcome.config,
        seed,
        version: VERSION,
        passed: outcome.passed,
        result: outcome.result,
        runtime: Runtime { wall_time_s: start.elapsed().as_secs_f64(), workers },
    };
    let rendered = match g.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(outcome.table.as_ref()),
    };
    let exit_code = if report.passed { 0 } else { 1 };
    Ok(Execution { report, rendered, exit_code })
}

/// Parses `args`, executes, writes the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let exec = match execute(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.global.out {
        Some(path) => std::fs::write(path, &exec.rendered).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(exec.rendered.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    exec.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_positive("0").is_err());
        assert_eq!(parse_positive("1e12"), Ok(1e12));
    }

    #[test]
    fn unknown_lemma_is_a_usage_error() {
        let e = Cli::try_parse_from(["crosspoly", "verify", "unknown-name"]).unwrap_err();
        assert!(e.use_stderr());
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from(["crosspoly", "verify", "chi2-tail", "--seed", "7", "--samples", "1e6"]).unwrap();
        assert_eq!(cli.global.seed, Some(7));
        assert_eq!(cli.global.samples, Some(1_000_000));
    }
}
