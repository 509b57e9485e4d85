//! dualcheck: model files in, machine-readable verification reports out.
//!
//! Reports are TOML on standard output; timing goes to standard error so
//! that exact-backend reports are byte-identical across runs. Exit codes:
//! 0 pass, 1 verified failure (with witnesses), 2 usage or schema error,
//! 3 resource budget exceeded.

mod commands;
mod modelfile;
mod report;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use duality_core::duality::DualityError;
use duality_core::linop::LinopError;
use duality_core::models::ModelError;
use duality_core::simulate::SimError;
use duality_core::statespace::SpaceError;

#[derive(Debug)]
pub enum CliError {
    /// Malformed input: file, schema, parameter, or usage. Exit code 2.
    Schema(String),
    /// A resource budget was exceeded. Exit code 3.
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(msg) | CliError::Budget(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<SpaceError> for CliError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Schema(other.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Space(inner) => inner.into(),
            other => CliError::Schema(other.to_string()),
        }
    }
}

impl From<DualityError> for CliError {
    fn from(e: DualityError) -> Self {
        match e {
            DualityError::CommutantBudget { .. } => CliError::Budget(e.to_string()),
            other => CliError::Schema(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Schema(e.to_string())
    }
}

impl From<LinopError> for CliError {
    fn from(e: LinopError) -> Self {
        CliError::Schema(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "dualcheck",
    version,
    about = "Exact and Monte Carlo verification of Markov process dualities"
)]
pub struct Cli {
    /// Residual tolerance for float-backend checks.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Override the simulation seed from the model file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Maximum operator dimension for the exact commutant solver.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Check that the model file describes a Markov generator.
    Validate { file: PathBuf },
    /// Check L D = D adjoint(L') for the duality in the model file.
    DualityCheck { file: PathBuf },
    /// Print the q-dual parameter set of a reaction-diffusion model.
    QDual {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[arg(long)]
        d: String,
        #[arg(long)]
        e: String,
        #[arg(long)]
        q: String,
    },
    /// Check the thinning intertwining L K_p = K_p L'.
    ThinningCheck { file: PathBuf },
    /// Compute a basis of the symmetry algebra {S : S L = L S}.
    Commutant { file: PathBuf },
    /// Compute a basis of invariant measures (exact left null space).
    InvariantMeasure { file: PathBuf },
    /// Check a named Lie-algebra representation against its table.
    RepCheck {
        /// One of: pauli, ps-pauli, spin, bargmann, kdef, heisenberg.
        rep: String,
        /// Spin representation index (rep = spin).
        #[arg(long)]
        n: Option<u32>,
        /// Bargmann index as a rational string (rep = bargmann).
        #[arg(long)]
        r: Option<String>,
        /// Weight parameter as a rational string (rep = kdef).
        #[arg(long)]
        alpha: Option<String>,
        /// Truncation cap for infinite-dimensional representations.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Check the inclusion/energy duality at the polynomial level.
    SipBepCheck { file: PathBuf },
    /// Check the Wright-Fisher dualities (blocks, rows, self-duality).
    WfCheck {
        /// Selection strength as a rational string.
        #[arg(long)]
        s: String,
        /// Moment truncation cap.
        #[arg(long, default_value_t = 12)]
        cap: u32,
    },
    /// Monte Carlo duality gate over the model file's simulation grid.
    McDuality { file: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    match commands::dispatch(&cli) {
        Ok(report) => {
            let text = toml::to_string(&report).expect("report serializes to TOML");
            print!("{text}");
            eprintln!("# timing_ms = {}", started.elapsed().as_millis());
            std::process::exit(if report.pass { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
