use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// One-pass penalized linear regression with k-fold cross validation.
#[derive(Debug, Parser)]
#[command(name = "penreg", version)]
pub struct Cli {
    /// Worker threads for ingestion and fold jobs.
    #[arg(long, global = true, env = "PENREG_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validate, fit, and write a model artifact.
    Train(TrainArgs),
    /// Apply a saved model to delimited data.
    Predict(PredictArgs),
    /// Ingest data and write the per-fold statistics checkpoint.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyArg {
    Lasso,
    Ridge,
    #[value(name = "elastic-net")]
    ElasticNet,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input file; repeat for multiple shards.
    #[arg(long = "input", value_name = "PATH")]
    pub inputs: Vec<PathBuf>,

    /// Response column (header name or zero-based index).
    #[arg(long)]
    pub response: Option<String>,

    /// Comma-separated feature columns; defaults to every other column.
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,

    /// Number of cross-validation folds [default: 5].
    #[arg(long)]
    pub k: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Field delimiter (single byte; `\t` for tab).
    #[arg(long, default_value = ",")]
    pub delimiter: String,

    /// Input files have no header line.
    #[arg(long)]
    pub no_header: bool,

    /// Largest tolerated fraction of malformed records.
    #[arg(long, default_value_t = 0.01)]
    pub rejection_cap: f64,

    /// Kahan-compensated accumulation.
    #[arg(long)]
    pub compensated: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum, default_value = "lasso")]
    pub penalty: PenaltyArg,

    /// Lasso fraction for elastic-net [default: 0.5].
    #[arg(long)]
    pub mix: Option<f64>,

    /// Explicit descending lambda grid, e.g. `4,2,1`.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_lambdas", "lambda_min_ratio"])]
    pub lambdas: Option<Vec<f64>>,

    #[arg(long, default_value_t = 100)]
    pub n_lambdas: usize,

    /// Smallest lambda as a fraction of lambda_max [default: 1e-3, or 1e-2 when n < p].
    #[arg(long)]
    pub lambda_min_ratio: Option<f64>,

    #[arg(long)]
    pub no_intercept: bool,

    /// Resume from a statistics checkpoint instead of reading raw data.
    #[arg(long, value_name = "PATH", conflicts_with = "inputs")]
    pub from_stats: Option<PathBuf>,

    /// Leave the last fold out of the CV average and the final fit.
    #[arg(long)]
    pub literal_folds: bool,

    #[arg(long, default_value_t = 10_000)]
    pub max_sweeps: usize,

    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    /// Model artifact path.
    #[arg(long, short, default_value = "model.json")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub input: PathBuf,

    /// Prediction output; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// Echo each input line followed by the prediction.
    #[arg(long)]
    pub append: bool,

    #[arg(long, default_value = ",")]
    pub delimiter: String,

    #[arg(long)]
    pub no_header: bool,

    #[arg(long, default_value_t = 0.01)]
    pub rejection_cap: f64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Checkpoint path.
    #[arg(long, short, default_value = "stats.json")]
    pub output: PathBuf,
}
