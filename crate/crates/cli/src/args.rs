use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "msconf",
    version,
    about = "Split, multi split and leave-one-out conformal prediction sets"
)]
pub struct Cli {
    /// Worker threads (default: all cores; 1 runs sequentially).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single split conformal sets.
    Predict(PredictArgs),
    /// Multi split conformal sets.
    Multisplit(MultisplitArgs),
    /// Cross-conformal sets (B folds).
    Crossconf(MultisplitArgs),
    /// Leave-one-out conformal sets.
    Loo(PredictArgs),
    /// Jackknife+ intervals.
    Jackknife(PredictArgs),
    /// Train/test replications on the Communities and Crime table.
    Experiment(ExperimentArgs),
    /// Monte Carlo coverage on a linear-Gaussian model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreKind {
    Residual,
    Cqr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Leftskewed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Single,
    Multisplit,
    Crossconf,
    Loo,
    Jackknife,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Training CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,

    /// Query CSV; feature columns are matched to the training columns by name.
    #[arg(long)]
    pub query: PathBuf,

    /// Response column name or 0-based index (default `y`, or
    /// ViolentCrimesPerPop with --crime).
    #[arg(long)]
    pub response_col: Option<String>,

    /// Read --data with the Communities and Crime loader.
    #[arg(long)]
    pub crime: bool,

    /// Like --crime, and require exactly 99 features after filtering.
    #[arg(long)]
    pub strict_crime: bool,

    /// JSON-lines output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum, default_value = "residual")]
    pub score: ScoreKind,

    /// CQR quantile level, in (0, 0.5].
    #[arg(long, default_value_t = 0.1)]
    pub gamma: f64,

    /// Neighbours for CQR (default ⌈√w⌉ for w training rows).
    #[arg(long)]
    pub knn_k: Option<usize>,

    /// Ridge penalty; overrides --ridge-factor.
    #[arg(long)]
    pub penalty: Option<f64>,

    /// Ridge penalty as a multiple of c², c the largest singular value of the
    /// centered training matrix.
    #[arg(long, default_value_t = 1e-3)]
    pub ridge_factor: f64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub score: ScoreArgs,

    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    /// Calibration size (default: half the rows).
    #[arg(long)]
    pub m: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MultisplitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub score: ScoreArgs,

    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    /// Number of splits (folds for crossconf).
    #[arg(long, default_value_t = 51)]
    pub b: usize,

    /// Calibration size per split (multisplit only; default: half the rows).
    #[arg(long)]
    pub m: Option<usize>,

    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,

    #[arg(long, default_value_t = 0)]
    pub lambda: usize,

    /// Sets τ and λ from B; conflicts with --tau/--lambda.
    #[arg(long, value_enum, conflicts_with_all = ["tau", "lambda"])]
    pub preset: Option<Preset>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// communities.data (headerless) or a CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,

    #[arg(long, default_value = "ViolentCrimesPerPop")]
    pub response_col: String,

    #[arg(long)]
    pub strict_crime: bool,

    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    #[arg(long, default_value_t = 51)]
    pub b: usize,

    #[arg(long, default_value_t = 99)]
    pub m: usize,

    #[arg(long, default_value_t = 200)]
    pub n_train: usize,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    /// Comma-separated: single, leftskewed, jackknife_plus, tau_alpha,
    /// tau_half, tau_one_minus_alpha, custom:<tau>:<lambda>.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Use raw features instead of training-fold standardization.
    #[arg(long)]
    pub no_standardize: bool,

    #[arg(long, default_value_t = 1e-3)]
    pub ridge_factor: f64,

    /// Output directory for records.csv, summary.csv and summary.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "single")]
    pub method: SimKind,

    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,

    #[arg(long, default_value_t = 2000)]
    pub reps: usize,

    /// Feature dimension.
    #[arg(long, default_value_t = 5)]
    pub d: usize,

    /// Training rows per repetition.
    #[arg(long, default_value_t = 150)]
    pub n: usize,

    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,

    #[arg(long, default_value_t = 25)]
    pub b: usize,

    #[arg(long, default_value_t = 99)]
    pub m: usize,

    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,

    #[arg(long, default_value_t = 0)]
    pub lambda: usize,

    #[arg(long, value_enum, conflicts_with_all = ["tau", "lambda"])]
    pub preset: Option<Preset>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also write a one-row CSV here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
