mod cli;
mod predict;

use std::process::ExitCode;

use clap::Parser;
use log::{info, warn};
use penreg::artifact::ModelArtifact;
use penreg::ingest::{ingest, Checkpoint, ColumnSelector, IngestConfig, IngestOutcome};
use penreg::{train, CvOptions, Error, LambdaGrid, PenaltySpec, SolveControl, StandardizeOptions};

use crate::cli::{Cli, Command, InputArgs, PenaltyArg, StatsArgs, TrainArgs};

/// Process exit statuses.
pub mod exit {
    pub const USAGE: u8 = 2;
    pub const INGEST: u8 = 3;
    pub const SOLVE: u8 = 4;
    pub const SCHEMA: u8 = 5;
    pub const OUTPUT: u8 = 1;
    /// Stdout was closed by the reader; not an error.
    pub const PIPE_CLOSED: u8 = 0;
}

/// An error paired with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            warn!("could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => predict::cmd_predict(args),
        Command::Stats(args) => cmd_stats(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) if f.code == exit::PIPE_CLOSED => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

pub fn parse_delimiter(raw: &str) -> Result<u8, Failure> {
    match raw {
        "\\t" | "tab" => Ok(b'\t'),
        s if s.len() == 1 => Ok(s.as_bytes()[0]),
        s => Err(Failure::new(exit::USAGE, format!("delimiter must be one byte, got {s:?}"))),
    }
}

fn ingest_config(args: &InputArgs) -> Result<IngestConfig, Failure> {
    if args.inputs.is_empty() {
        return Err(Failure::new(exit::USAGE, "at least one --input is required"));
    }
    let response = args
        .response
        .as_deref()
        .ok_or_else(|| Failure::new(exit::USAGE, "--response is required"))?;
    let mut config = IngestConfig::new(args.inputs.clone(), parse_selector(response));
    config.k = args.k.unwrap_or(5);
    config.seed = args.seed;
    config.features = args
        .features
        .as_ref()
        .map(|f| f.iter().map(|c| parse_selector(c)).collect());
    config.delimiter = parse_delimiter(&args.delimiter)?;
    config.has_header = !args.no_header;
    config.rejection_cap = args.rejection_cap;
    config.compensated = args.compensated;
    config.validate().map_err(|e| Failure::new(exit::USAGE, e))?;
    Ok(config)
}

fn parse_selector(raw: &str) -> ColumnSelector {
    raw.parse().unwrap_or_else(|never| match never {})
}

fn run_ingest(args: &InputArgs) -> Result<IngestOutcome, Failure> {
    let config = ingest_config(args)?;
    let outcome = ingest(&config).map_err(|e| Failure::new(exit::INGEST, e))?;
    info!(
        "ingested {} records ({} rejected) into {} folds",
        outcome.folds.total_records,
        outcome.folds.rejected_records,
        outcome.folds.k()
    );
    Ok(outcome)
}

fn penalty_spec(args: &TrainArgs) -> Result<PenaltySpec, Failure> {
    let usage = |e: Error| Failure::new(exit::USAGE, e);
    let mut spec = match args.penalty {
        PenaltyArg::Lasso => PenaltySpec::lasso(),
        PenaltyArg::Ridge => PenaltySpec::ridge(),
        PenaltyArg::ElasticNet => PenaltySpec::elastic_net(args.mix.unwrap_or(0.5)).map_err(usage)?,
    };
    if let Some(mix) = args.mix {
        if mix != spec.mix {
            return Err(Failure::new(
                exit::USAGE,
                format!("--mix {mix} is inconsistent with --penalty {:?}", args.penalty),
            ));
        }
    }
    spec.grid = match &args.lambdas {
        Some(l) => LambdaGrid::Explicit(l.clone()),
        None => LambdaGrid::Auto {
            n_lambdas: args.n_lambdas,
            min_ratio: args.lambda_min_ratio,
        },
    };
    spec.validate().map_err(usage)?;
    Ok(spec)
}

fn cmd_train(args: TrainArgs) -> Result<(), Failure> {
    let spec = penalty_spec(&args)?;
    let control = SolveControl {
        max_sweeps: args.max_sweeps,
        tol: args.tol,
        active_set: true,
    };
    if control.max_sweeps == 0 || !(control.tol > 0.0) {
        return Err(Failure::new(exit::USAGE, "--max-sweeps must be >= 1 and --tol > 0"));
    }
    let data = match &args.from_stats {
        Some(path) => {
            let outcome = Checkpoint::read(path)
                .and_then(Checkpoint::into_outcome)
                .map_err(|e| Failure::new(exit::INGEST, e))?;
            let k = args.input.k.unwrap_or(5);
            if outcome.folds.k() != k {
                return Err(Failure::new(
                    exit::USAGE,
                    format!("checkpoint has k = {} but --k is {k}", outcome.folds.k()),
                ));
            }
            outcome
        }
        None => run_ingest(&args.input)?,
    };
    let options = CvOptions {
        standardize: StandardizeOptions {
            intercept: !args.no_intercept,
            ..Default::default()
        },
        control,
        literal_fold_indices: args.literal_folds,
        parallel: true,
    };
    let fit = train(&data.folds, &spec, &options).map_err(|e| {
        let code = match e {
            Error::InvalidGrid(_) | Error::InvalidConfig(_) => exit::USAGE,
            _ => exit::SOLVE,
        };
        Failure::new(code, e)
    })?;
    if !fit.converged {
        warn!("final fit did not converge; the model is flagged in the artifact");
    }
    let artifact = ModelArtifact::new(&fit, &data);
    artifact
        .write(&args.output)
        .map_err(|e| Failure::new(exit::OUTPUT, e))?;

    println!("records        {} ({} rejected)", data.folds.total_records, data.folds.rejected_records);
    println!("folds          {} (sizes {:?})", fit.cv.fold_sizes.len(), fit.cv.fold_sizes);
    println!("lambda grid    {} values, {} .. {}", fit.cv.lambdas().len(), fit.cv.lambdas()[0], fit.cv.lambdas()[fit.cv.lambdas().len() - 1]);
    println!("lambda_opt     {}", fit.lambda_opt);
    let best = fit.cv.mean_mse[fit.cv.lambda_opt_index];
    println!("cv mse         {}", best.map_or("n/a".to_string(), |m| m.to_string()));
    println!("nonzero        {} of {}", fit.model.nonzero(), fit.model.coefficients.len());
    println!("intercept      {}", fit.model.intercept);
    println!("in-sample mse  {}", fit.in_sample_mse);
    println!("converged      {}", fit.converged);
    println!("model          {}", args.output.display());
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), Failure> {
    let outcome = run_ingest(&args.input)?;
    Checkpoint::from_outcome(&outcome)
        .write(&args.output)
        .map_err(|e| Failure::new(exit::OUTPUT, e))?;
    println!("records   {} ({} rejected)", outcome.folds.total_records, outcome.folds.rejected_records);
    for (i, f) in outcome.folds.folds.iter().enumerate() {
        println!("fold {i:<4} n = {}", f.n);
    }
    println!("checkpoint {}", args.output.display());
    Ok(())
}
