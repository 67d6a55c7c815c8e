//! K-fold cross validation and the final fit, from fold statistics only.
//!
//! For fold `i` the training set is the merge of every other fold. It is
//! standardized on its own, solved along the shared lambda grid, mapped back
//! to raw units, and scored on fold `i` through its statistics. The lambda
//! with the lowest mean held-out MSE is refit on all folds.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::FoldedStats;
use crate::solver::{lambda_grid, solve_path, PenaltySpec, ResolvedGrid, SolveControl};
use crate::standardize::{standardize, DroppedColumn, StandardizeOptions, StandardizedProblem};
use crate::stats::{packed_index, SufficientStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub standardize: StandardizeOptions,
    pub control: SolveControl,
    /// Leave the last fold out of both the CV average and the final fit
    /// (folds `0..k-1` only).
    pub literal_fold_indices: bool,
    /// Run fold jobs on the rayon pool.
    pub parallel: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            standardize: StandardizeOptions::default(),
            control: SolveControl::default(),
            literal_fold_indices: false,
            parallel: true,
        }
    }
}

/// `y = intercept + x^T coefficients` in raw units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn null(intercept: f64, p: usize) -> Self {
        Self {
            intercept,
            coefficients: vec![0.0; p],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }

    pub fn nonzero(&self) -> usize {
        self.coefficients.iter().filter(|&&b| b != 0.0).count()
    }
}

/// Merge of every fold except `i`.
pub fn fold_complement(folds: &FoldedStats, i: usize) -> Result<SufficientStats> {
    if i >= folds.k() {
        return Err(Error::InvalidConfig(format!("fold {i} out of range for k = {}", folds.k())));
    }
    let mut out = SufficientStats::zero(folds.p());
    for (j, f) in folds.folds.iter().enumerate() {
        if j != i {
            out.merge_from(f)?;
        }
    }
    if out.n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(out)
}

/// Mean squared residual of `model` on the rows summarized by `test`:
///
/// ```text
/// (y'y - 2a sum(y) - 2 b'X'y + n a^2 + 2a b'sum(x) + b'X'Xb) / n
/// ```
pub fn test_mse_from_stats(test: &SufficientStats, model: &LinearModel) -> Result<f64> {
    if test.n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let p = test.dim();
    let beta = &model.coefficients;
    if beta.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: beta.len(),
        });
    }
    let a = model.intercept;
    let n = test.n as f64;
    let dot = |u: &[f64]| u.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>();
    let mut quad = 0.0;
    for i in 0..p {
        if beta[i] == 0.0 {
            continue;
        }
        let mut row = test.xtx_upper[packed_index(p, i, i)] * beta[i];
        for j in i + 1..p {
            row += 2.0 * test.xtx_upper[packed_index(p, i, j)] * beta[j];
        }
        quad += beta[i] * row;
    }
    let sse = test.sum_yy - 2.0 * a * test.sum_y - 2.0 * dot(&test.xty)
        + n * a * a
        + 2.0 * a * dot(&test.sum_x)
        + quad;
    Ok(sse.max(0.0) / n)
}

/// Maps standardized coefficients to raw units: `beta_j = beta_std_j / d_j`
/// and `alpha = ybar - sum_j mean_j beta_j`.
pub fn back_transform(beta_std: &[f64], problem: &StandardizedProblem) -> Result<LinearModel> {
    if beta_std.len() != problem.p_active() {
        return Err(Error::DimensionMismatch {
            expected: problem.p_active(),
            found: beta_std.len(),
        });
    }
    let mut coefficients = vec![0.0; problem.p()];
    for (&j, &b) in problem.active.iter().zip(beta_std) {
        coefficients[j] = b / problem.norms[j];
    }
    let intercept = if problem.intercept {
        problem.y_mean
            - problem
                .means
                .iter()
                .zip(&coefficients)
                .map(|(m, b)| m * b)
                .sum::<f64>()
    } else {
        0.0
    };
    Ok(LinearModel {
        intercept,
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub grid: ResolvedGrid,
    /// `fold_mse[fold][lambda]`; `None` for skipped folds and for cells whose
    /// solve failed or did not converge.
    pub fold_mse: Vec<Vec<Option<f64>>>,
    /// Mean over the scored folds' available cells.
    pub mean_mse: Vec<Option<f64>>,
    pub lambda_opt: f64,
    pub lambda_opt_index: usize,
    pub fold_sizes: Vec<u64>,
    /// Folds that contributed to `mean_mse`.
    pub scored_folds: Vec<usize>,
}

impl CvReport {
    pub fn lambdas(&self) -> &[f64] {
        &self.grid.lambdas
    }
}

/// Either a solvable problem or a design without any usable column.
enum Prepared {
    Problem(StandardizedProblem),
    Null { y_mean: f64 },
}

fn prepare(stats: &SufficientStats, options: StandardizeOptions) -> Result<Prepared> {
    match standardize(stats, options) {
        Ok(p) => Ok(Prepared::Problem(p)),
        Err(Error::EmptyModel) => Ok(Prepared::Null {
            y_mean: if options.intercept {
                stats.sum_y / stats.n as f64
            } else {
                0.0
            },
        }),
        Err(e) => Err(e),
    }
}

/// Held-out MSE per lambda for fold `i`.
fn fold_curve(
    folds: &FoldedStats,
    i: usize,
    spec: &PenaltySpec,
    lambdas: &[f64],
    options: &CvOptions,
) -> Result<Vec<Option<f64>>> {
    let test = &folds.folds[i];
    let train = fold_complement(folds, i)?;
    let p = folds.p();
    match prepare(&train, options.standardize)? {
        Prepared::Null { y_mean } => {
            let mse = test_mse_from_stats(test, &LinearModel::null(y_mean, p))?;
            Ok(vec![Some(mse); lambdas.len()])
        }
        Prepared::Problem(problem) => {
            let path = solve_path(&problem, spec, lambdas, &options.control)?;
            path.into_iter()
                .zip(lambdas)
                .map(|(sol, &lambda)| match sol {
                    Ok(sol) if sol.converged => {
                        let model = back_transform(&sol.beta_std, &problem)?;
                        test_mse_from_stats(test, &model).map(Some)
                    }
                    Ok(sol) => {
                        warn!(
                            "fold {i}, lambda {lambda}: no convergence after {} sweeps (kkt {:e}); cell excluded",
                            sol.sweeps_used, sol.kkt_residual
                        );
                        Ok(None)
                    }
                    Err(e) => {
                        warn!("fold {i}, lambda {lambda}: {e}; cell excluded");
                        Ok(None)
                    }
                })
                .collect()
        }
    }
}

fn null_grid(spec: &PenaltySpec) -> ResolvedGrid {
    match &spec.grid {
        crate::solver::LambdaGrid::Explicit(l) => ResolvedGrid {
            lambdas: l.clone(),
            auto: false,
            lambda_max: None,
            min_ratio: None,
        },
        crate::solver::LambdaGrid::Auto { .. } => ResolvedGrid {
            lambdas: vec![0.0],
            auto: true,
            lambda_max: Some(0.0),
            min_ratio: None,
        },
    }
}

/// Folds included in the CV average and the final fit.
fn used_folds(folds: &FoldedStats, options: &CvOptions) -> Vec<usize> {
    let k = folds.k();
    let upto = if options.literal_fold_indices { k - 1 } else { k };
    (0..upto).filter(|&i| folds.folds[i].n > 0).collect()
}

pub fn cross_validate(folds: &FoldedStats, spec: &PenaltySpec, options: &CvOptions) -> Result<CvReport> {
    spec.validate()?;
    let non_empty = folds.folds.iter().filter(|f| f.n > 0).count() as u64;
    if non_empty < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: non_empty,
        });
    }
    let grid = match prepare(&folds.all_data(), options.standardize)? {
        Prepared::Problem(all) => lambda_grid(&all, spec)?,
        Prepared::Null { .. } => {
            warn!("no feature column has any spread; every fit is the constant model");
            null_grid(spec)
        }
    };
    let lambdas = grid.lambdas.as_slice();

    let scored = used_folds(folds, options);
    let job = |&i: &usize| fold_curve(folds, i, spec, lambdas, options);
    let curves: Vec<Vec<Option<f64>>> = if options.parallel {
        scored.par_iter().map(job).collect::<Result<_>>()?
    } else {
        scored.iter().map(job).collect::<Result<_>>()?
    };

    let mut fold_mse = vec![vec![None; lambdas.len()]; folds.k()];
    for (&i, curve) in scored.iter().zip(curves) {
        fold_mse[i] = curve;
    }
    for i in 0..folds.k() {
        if folds.folds[i].n == 0 {
            warn!("fold {i} is empty and was skipped");
        }
    }

    let mean_mse: Vec<Option<f64>> = (0..lambdas.len())
        .map(|l| {
            let cells: Vec<f64> = scored.iter().filter_map(|&i| fold_mse[i][l]).collect();
            (!cells.is_empty()).then(|| cells.iter().sum::<f64>() / cells.len() as f64)
        })
        .collect();

    // Grid is descending, so keeping the first strict minimum breaks ties
    // toward the larger lambda.
    let mut best: Option<(usize, f64)> = None;
    for (l, m) in mean_mse.iter().enumerate() {
        if let Some(m) = *m {
            if best.is_none_or(|(_, b)| m < b) {
                best = Some((l, m));
            }
        }
    }
    let (lambda_opt_index, _) = best.ok_or_else(|| Error::SolverFault {
        lambda: f64::NAN,
        reason: "no lambda produced a converged fit on any fold".into(),
    })?;

    Ok(CvReport {
        lambda_opt: lambdas[lambda_opt_index],
        lambda_opt_index,
        grid,
        fold_mse,
        mean_mse,
        fold_sizes: folds.folds.iter().map(|f| f.n).collect(),
        scored_folds: scored,
    })
}

/// Standardization metadata of the final fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub norms: Vec<f64>,
    pub y_mean: f64,
    pub dropped: Vec<DroppedColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub model: LinearModel,
    pub lambda_opt: f64,
    pub penalty: PenaltySpec,
    pub cv: CvReport,
    pub standardization: Standardization,
    pub fit_intercept: bool,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Mean squared residual of the final model over its training rows.
    pub in_sample_mse: f64,
    pub n: u64,
}

impl FittedModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.model.predict(x)
    }
}

/// Cross-validates, then refits at the selected lambda on all folds.
pub fn train(folds: &FoldedStats, spec: &PenaltySpec, options: &CvOptions) -> Result<FittedModel> {
    let cv = cross_validate(folds, spec, options)?;
    let mut data = SufficientStats::zero(folds.p());
    for &i in &used_folds(folds, options) {
        data.merge_from(&folds.folds[i])?;
    }
    let p = folds.p();
    let (model, standardization, converged, kkt_residual) = match prepare(&data, options.standardize)? {
        Prepared::Null { y_mean } => {
            let stats_means = data.mean_x().unwrap_or_else(|| vec![0.0; p]);
            (
                LinearModel::null(y_mean, p),
                Standardization {
                    means: if options.standardize.intercept { stats_means } else { vec![0.0; p] },
                    norms: vec![0.0; p],
                    y_mean,
                    dropped: (0..p)
                        .map(|column| DroppedColumn {
                            column,
                            reason: crate::standardize::DropReason::ZeroVariance,
                        })
                        .collect(),
                },
                true,
                0.0,
            )
        }
        Prepared::Problem(problem) => {
            let prefix = &cv.lambdas()[..=cv.lambda_opt_index];
            let path = solve_path(&problem, spec, prefix, &options.control)?;
            let sol = path.into_iter().last().expect("non-empty prefix")?;
            if !sol.converged {
                warn!(
                    "final fit at lambda {} did not converge (kkt {:e})",
                    sol.lambda, sol.kkt_residual
                );
            }
            (
                back_transform(&sol.beta_std, &problem)?,
                Standardization {
                    means: problem.means.clone(),
                    norms: problem.norms.clone(),
                    y_mean: problem.y_mean,
                    dropped: problem.dropped.clone(),
                },
                sol.converged,
                sol.kkt_residual,
            )
        }
    };
    let in_sample_mse = test_mse_from_stats(&data, &model)?;
    Ok(FittedModel {
        model,
        lambda_opt: cv.lambda_opt,
        penalty: spec.clone(),
        cv,
        standardization,
        fit_intercept: options.standardize.intercept,
        converged,
        kkt_residual,
        in_sample_mse,
        n: data.n,
    })
}
