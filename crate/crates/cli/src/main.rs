//! `aerogp`: config-driven identification runs.
//!
//! Exit codes: 0 success, 2 invalid config or input, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] aerogp::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

/// Gaussian-process identification of short-period stability characteristics.
#[derive(Debug, Parser)]
#[command(name = "aerogp", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true, default_value = "aerogp.toml")]
    config: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load telemetry CSVs and write derived series with ρ, q̄ and Q̇.
    Ingest {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Fit a C_m or C_Z GP on derived series.
    Fit(FitArgs),
    /// Fit trim functions from trim-shot CSVs.
    FitTrim {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Short-period frequency and damping over a q̄ grid at fixed Mach.
    Shortperiod(ShortPeriodArgs),
    /// Posterior mean and standard deviation over two state components.
    Surface(SurfaceArgs),
    /// Simulate a maneuver on the configured truth model.
    Synth {
        /// rollercoaster-doublet, rollercoaster, doublet or frequency-sweep.
        #[arg(long, default_value = "rollercoaster-doublet")]
        scenario: String,
    },
    /// Compare predictions with historical short-period data by Mach region.
    Eval {
        /// CSV with qbar, mach, omega_hz, zeta columns (a shortperiod output works).
        #[arg(long)]
        predictions: PathBuf,
        /// Historical set; the bundled one when omitted.
        #[arg(long)]
        historical: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    target: String,
    /// Write the zero-data model (prior mean and kernel only).
    #[arg(long)]
    prior_only: bool,
    #[arg(required_unless_present = "prior_only")]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct ShortPeriodArgs {
    #[arg(long)]
    cm: PathBuf,
    #[arg(long)]
    cz: PathBuf,
    #[arg(long)]
    trim: PathBuf,
    #[arg(long)]
    mach: f64,
    /// `lo:hi:n` (inclusive, n points) or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    qbar_grid: String,
}

#[derive(Debug, Args)]
struct SurfaceArgs {
    #[arg(long)]
    model: PathBuf,
    /// Two state components, e.g. `alpha,q`.
    #[arg(long, default_value = "alpha,q")]
    dims: String,
    /// `lo:hi:n` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    grid_a: String,
    #[arg(long, allow_hyphen_values = true)]
    grid_b: String,
    /// Base state `mach,rho,qbar,p,q,r,alpha,de`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["trim", "mach", "qbar"])]
    base: Option<String>,
    /// Trim model giving the base state at `--mach`, `--qbar`.
    #[arg(long, requires_all = ["mach", "qbar"])]
    trim: Option<PathBuf>,
    #[arg(long)]
    mach: Option<f64>,
    #[arg(long)]
    qbar: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::LoadedConfig::load(&cli.config)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", cfg.output_dir.display())))?;
    match cli.command {
        Command::Ingest { inputs } => commands::ingest(&cfg, &inputs),
        Command::Fit(a) => commands::fit(&cfg, &a.target, a.prior_only, &a.inputs),
        Command::FitTrim { inputs } => commands::fit_trim(&cfg, &inputs),
        Command::Shortperiod(a) => commands::shortperiod(&cfg, &a.cm, &a.cz, &a.trim, a.mach, &a.qbar_grid),
        Command::Surface(a) => {
            let base = match (&a.base, &a.trim) {
                (Some(b), _) => commands::SurfaceBase::State(b.clone()),
                (None, Some(t)) => commands::SurfaceBase::Trim {
                    path: t.clone(),
                    mach: a.mach.unwrap_or_default(),
                    qbar: a.qbar.unwrap_or_default(),
                },
                (None, None) => return Err(CliError::Input("surface needs --base or --trim".into())),
            };
            commands::surface(&cfg, &a.model, &a.dims, &a.grid_a, &a.grid_b, base)
        }
        Command::Synth { scenario } => commands::synth(&cfg, &scenario),
        Command::Eval {
            predictions,
            historical,
        } => commands::eval(&cfg, &predictions, historical.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
