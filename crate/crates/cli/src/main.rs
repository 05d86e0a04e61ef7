//! `beamspin`: simulate, fit, decompose, bound and sweep from the command
//! line. Exit codes: 0 success, 2 input error, 3 numerical error,
//! 4 bound not constraining, 1 I/O failure.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use beamspin::sweeps::Engine;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
    Io(String),
}

impl From<beamspin::Error> for CliError {
    fn from(e: beamspin::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    /// The detail text without the category prefix.
    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Outcome of a successful command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConstraining,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EngineArg {
    ClosedForm,
    Dynamics,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::ClosedForm => Engine::ClosedForm,
            EngineArg::Dynamics => Engine::Dynamics,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "beamspin", version, about = "Electron-beam driven spin-qubit simulator and analysis toolkit")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw (overrides the config `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Evaluation engine; `simulate` defaults to dynamics, `sweep` to closed-form.
    #[arg(long, global = true, value_enum)]
    pub engine: Option<EngineArg>,
    /// Also write an SVG plot.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Omit run timestamps from SVG and metadata files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the sequence described in the `[simulate]` config section.
    Simulate,
    /// Fit a record CSV.
    Fit {
        input: PathBuf,
        #[arg(long, default_value = "exponential")]
        model: String,
        /// poisson | unweighted
        #[arg(long, default_value = "poisson")]
        weighting: String,
    },
    /// Decompose spectra into NV⁻ and NV⁰ weights.
    Decompose {
        /// Spectrum CSV files (wavelength_nm, intensity).
        spectra: Vec<PathBuf>,
        /// NV⁻ reference; synthesized on the first spectrum's grid if absent.
        #[arg(long)]
        ref_minus: Option<PathBuf>,
        /// NV⁰ reference; synthesized on the first spectrum's grid if absent.
        #[arg(long)]
        ref_zero: Option<PathBuf>,
        /// Beam current of each spectrum (comma separated); defaults to the index.
        #[arg(long = "currents-uA", value_delimiter = ',')]
        currents_ua: Vec<f64>,
    },
    /// Coupling bound from beam-on and reference lifetime fits.
    Bound {
        #[arg(long)]
        beam: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// delta | bootstrap
        #[arg(long, default_value = "delta")]
        method: String,
    },
    /// Run the sweep described in the `[sweep]` config section.
    Sweep,
}

fn configure_workers() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("BEAMSPIN_WORKERS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("BEAMSPIN_WORKERS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Input("BEAMSPIN_WORKERS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|_| commands::run(&cli));
    match result {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::NotConstraining) => ExitCode::from(4),
        Err(e) => {
            eprintln!("beamspin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
