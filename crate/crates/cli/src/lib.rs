//! `stlab`: experiment driver. Every subcommand validates its parameters,
//! runs one experiment and writes `summary.json` plus CSV (and SVG) tables
//! into `<out>/<experiment>/`.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 failed check,
//! 4 numerical failure, 1 I/O failure.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use spacetime_core::adiabatic::Profile;
use spacetime_core::geometry::PlaquetteCircuit;
use spacetime_core::Error;

pub mod experiments;
pub mod output;

#[derive(Debug, Parser)]
#[command(name = "stlab", version, about = "Space-time circuit Hamiltonian experiments")]
pub struct Cli {
    /// Root directory for artifacts.
    #[arg(long, global = true, env = "STLAB_OUT_DIR", default_value = "stlab-out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Linear,
    Sine,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Linear => Profile::Linear,
            ProfileArg::Sine => Profile::Sine,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suite at one grid size.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Gap certificate of H(lambda) on the string sector over a lambda grid.
    GapScan {
        #[arg(long)]
        n: usize,
        /// `start:stop:step`, inclusive.
        #[arg(long, default_value = "0:1:0.1")]
        lambdas: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Circuit file; a random circuit on the centre region otherwise.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Adiabatic evolution, measurement and comparison with direct
    /// simulation.
    AdiabaticRun {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        region_size: usize,
        #[arg(long = "T", visible_alias = "total-time", default_value_t = 200.0)]
        total_time: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ProfileArg::Linear)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 20)]
        checkpoints: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Simulated measurement shots written to `samples.csv`.
        #[arg(long, default_value_t = 0)]
        shots: usize,
        /// Largest accepted total-variation distance to direct simulation.
        #[arg(long, default_value_t = 0.02)]
        max_tv: f64,
        #[arg(long, default_value_t = 0.0)]
        min_fidelity: f64,
    },
    /// Free evolution under the propagation term: time-averaged success and
    /// the Markov bounds.
    JanzingRun {
        #[arg(long)]
        n: usize,
        /// Side of the left-corner region; `max(1, n/4)` by default.
        #[arg(long)]
        k: Option<usize>,
        /// Averaging time; `inf` for the long-time limit.
        #[arg(long = "T", visible_alias = "total-time", default_value_t = 100.0)]
        total_time: f64,
    },
    /// Torus boundary blocks against the persistent-current ring.
    TorusCheck {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
    /// Quantum walk on Young's lattice: exact against numeric amplitudes.
    YoungWalk {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 12)]
        m_max: usize,
    },
    /// Plancherel samples by row insertion, with a chi-square test.
    PlancherelSample {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 60000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Rescaled sampled diagrams against the limit curve.
    LimitShape {
        #[arg(long, default_value_t = 1600)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.12)]
        threshold: f64,
        #[arg(long, default_value_t = 0.95)]
        min_fraction: f64,
    },
    /// Exact edge probabilities of the uniform string distribution.
    EdgeProbs {
        #[arg(long)]
        n: usize,
    },
}

/// Failure carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }

    pub fn csv(path: &Path, e: csv::Error) -> Self {
        Self { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::StepUnderflow { .. } | Error::DenseCutoff { .. } | Error::Leakage(_) => {
                EXIT_NUMERIC
            }
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

/// Reads and validates a circuit file.
pub fn parse_circuit(path: &Path) -> Result<PlaquetteCircuit, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read circuit {}: {e}", path.display())))?;
    PlaquetteCircuit::from_json(&text)
        .map_err(|e| CliError::config(format!("circuit {}: {e}", path.display())))
}

/// Parses `start:stop:step` into an inclusive grid inside `[0, 1]`.
pub fn parse_lambda_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::config(format!("lambda grid {spec:?} must be start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let vals: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (start, stop, step) = (vals[0], vals[1], vals[2]);
    if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop {
        return Err(CliError::config(format!("lambda grid {spec:?} must satisfy 0 <= start <= stop <= 1")));
    }
    if !(step > 0.0) {
        return Err(CliError::config(format!("lambda step in {spec:?} must be positive")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 10_000 {
        return Err(CliError::config(format!("lambda grid {spec:?} has more than 10000 points")));
    }
    Ok((0..count).map(|k| (start + k as f64 * step).min(stop)).collect())
}

/// Runs one command; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    experiments::dispatch(&cli.command, &cli.out)
}
