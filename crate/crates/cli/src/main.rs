//! `shellres`: scattering, poles, Gamow states and resonance expansions
//! for a spherical shell potential, driven by a TOML config.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flags or unwritable output (exit 2).
    Config(String),
    /// A library routine failed numerically (exit 3).
    Numerical(shellres::Error),
    /// Checks ran but did not all pass (exit 1).
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Numerical(e) => write!(f, "numerical error [{}]: {e}", e.name()),
            Self::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<shellres::Error> for CliError {
    fn from(e: shellres::Error) -> Self {
        use shellres::Error as E;
        match e {
            E::NonFinite { .. }
            | E::OrderedRadii { .. }
            | E::NonPositiveScale(_)
            | E::InvalidArgument(_)
            | E::AlphaNegative(_)
            | E::ArityTooSmall { .. }
            | E::InvalidTestFunction(_) => Self::Config(format!("[{}] {e}", e.name())),
            other => Self::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Config(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "shellres", version, about = "Resonances of a spherical shell potential on the complex k-plane")]
struct Cli {
    /// TOML configuration; the reference shell is used when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Leave the generation time out of report headers.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// S-matrix on a real k grid.
    Smatrix {
        #[arg(long, default_value_t = 0.1)]
        k_min: f64,
        #[arg(long, default_value_t = 20.0)]
        k_max: f64,
        #[arg(long, short, default_value_t = 200)]
        n: usize,
    },
    /// Resonance poles in the configured search region.
    Poles {
        /// Also write the anti-resonance partners.
        #[arg(long)]
        anti: bool,
    },
    /// Sample a Gamow state.
    Gamow {
        /// 1-based pole index, ordered by Re k.
        #[arg(long, default_value_t = 1)]
        pole: usize,
        /// Use the anti-resonance partner instead.
        #[arg(long)]
        anti: bool,
        /// Largest radius (default 3b).
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, short, default_value_t = 300)]
        n: usize,
    },
    /// Resonance expansion of the configured test function.
    Expand {
        /// in-in, out-out or out-in.
        #[arg(long, default_value = "in-in")]
        mode: String,
        /// Number of enclosed poles, shallowest first.
        #[arg(long)]
        poles: Option<usize>,
        /// Regulator values; three or more are extrapolated to zero.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.2, 0.1, 0.05])]
        alpha: Vec<f64>,
        /// Real-axis cutoff (overrides [contour] k_max).
        #[arg(long)]
        kmax: Option<f64>,
        /// Depth of the contour below the real axis; by default midway
        /// between the last enclosed pole and the next one.
        #[arg(long)]
        contour_depth: Option<f64>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SHELLRES_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("SHELLRES_THREADS must be a positive integer (got '{v}')")))?;
        if n == 0 {
            return Err(CliError::Config("SHELLRES_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", cfg.output_dir.display())))?;
    let stamp = !cli.no_timestamp;
    match cli.command {
        Command::Smatrix { k_min, k_max, n } => commands::smatrix(&cfg, k_min, k_max, n),
        Command::Poles { anti } => commands::poles(&cfg, anti),
        Command::Gamow { pole, anti, r_max, n } => commands::gamow(&cfg, pole, anti, r_max, n),
        Command::Expand { mode, poles, alpha, kmax, contour_depth } => {
            commands::expand(&cfg, &commands::ExpandArgs { mode, poles, alpha, kmax, contour_depth }, stamp)
        }
        Command::Verify => commands::verify(&cfg, stamp),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("shellres: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
