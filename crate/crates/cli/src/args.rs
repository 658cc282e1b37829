use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdrift_core::CountMode;

/// Default directory for files written without an explicit `--out`.
pub const OUT_DIR_ENV: &str = "QDRIFT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "qdrift", version, about = "Randomized Hamiltonian simulation: compile, cost and verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a seeded random gate sequence for exp(iHt).
    Compile(CompileArgs),
    /// Gate counts of every method at one time.
    Cost(CostArgs),
    /// Gate counts of every method over a log-spaced time grid.
    Sweep(SweepArgs),
    /// Phase-estimation budgets over failure probabilities.
    PhaseEst(PhaseEstArgs),
    /// Numerical checks of the qDRIFT bounds on small systems.
    Verify(VerifyArgs),
    /// Drop the smallest terms whose weights sum to at most eps.
    Truncate(TruncateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Approx,
}

impl From<ModeArg> for CountMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => CountMode::Exact,
            ModeArg::Approx => CountMode::Approx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExponentArg {
    PerTerm,
    Whole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrotterModelArg {
    ClosedForm,
    Solver,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[arg(long)]
    pub ham: PathBuf,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Emit controlled rotations for phase estimation.
    #[arg(long)]
    pub controlled: bool,
    /// Circuit file; defaults to `<stem>-seed<seed>.circ` in $QDRIFT_OUT_DIR
    /// or the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Either a Hamiltonian file or an explicit `(L, Λ, λ)` profile.
#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long, conflicts_with_all = ["n_terms", "max_weight", "lambda"])]
    pub ham: Option<PathBuf>,
    /// Number of terms L.
    #[arg(long = "L", requires_all = ["max_weight", "lambda"])]
    pub n_terms: Option<u64>,
    /// Largest term weight Λ.
    #[arg(long = "Lambda")]
    pub max_weight: Option<f64>,
    /// Total weight λ.
    #[arg(long = "lambda")]
    pub lambda: Option<f64>,
    /// Keep the smallest terms instead of removing up to eps of weight
    /// (file input only).
    #[arg(long)]
    pub no_truncate: bool,
    #[arg(long, value_enum, default_value = "per-term")]
    pub exponent: ExponentArg,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub eps: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e10)]
    pub t_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    /// Append the qDRIFT crossover time when one lies in the grid range.
    #[arg(long)]
    pub crossover: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PhaseEstArgs {
    #[arg(long = "L")]
    pub n_terms: u64,
    #[arg(long = "Lambda")]
    pub max_weight: f64,
    #[arg(long = "lambda")]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub delta_e: f64,
    /// Explicit failure probabilities; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    pub pf: Vec<f64>,
    #[arg(long, default_value_t = 1e-5)]
    pub pf_min: f64,
    #[arg(long, default_value_t = 0.1)]
    pub pf_max: f64,
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, value_enum, default_value = "closed-form")]
    pub trotter_model: TrotterModelArg,
    /// Ground-state overlap |c0|^2; enables the repeated-run filter check.
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Number of repeated runs for the filter check.
    #[arg(long, default_value_t = 100)]
    pub repetitions: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Hamiltonian to verify (at most 6 qubits); the built-in suite otherwise.
    #[arg(long)]
    pub ham: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 2019)]
    pub seed: u64,
    /// Use the mismatched angle 2λt/N in the slope test.
    #[arg(long)]
    pub negative_control: bool,
    /// Treat statistical flags as failures.
    #[arg(long)]
    pub strict: bool,
    /// Lower end of the accepted log-log slope (pass as `--slope-min=-2.3`).
    #[arg(long, default_value_t = qdrift_core::suite::SLOPE_WINDOW.0)]
    pub slope_min: f64,
    #[arg(long, default_value_t = qdrift_core::suite::SLOPE_WINDOW.1)]
    pub slope_max: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TruncateArgs {
    #[arg(long)]
    pub ham: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
