//! Lasso / Ridge / Elastic-net on the standardized Gram system.
//!
//! Minimizes
//!
//! ```text
//! tss - 2 b^T beta + beta^T g beta + lambda * (mix * |beta|_1 + (1 - mix) * |beta|_2^2)
//! ```
//!
//! by cyclic coordinate descent. The residual correlations `b - g beta` are
//! kept up to date from `g` alone, so no row-level data is touched.
//!
//! The loss is the plain residual sum of squares (no `1/2n` factor), which
//! makes `lambda` scale with the sample count.

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::standardize::{loss_from_stats, StandardizedProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    Lasso,
    Ridge,
    ElasticNet,
}

impl Penalty {
    pub fn as_str(self) -> &'static str {
        match self {
            Penalty::Lasso => "lasso",
            Penalty::Ridge => "ridge",
            Penalty::ElasticNet => "elastic_net",
        }
    }
}

impl std::str::FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lasso" => Ok(Penalty::Lasso),
            "ridge" => Ok(Penalty::Ridge),
            "elastic-net" | "elastic_net" | "elasticnet" => Ok(Penalty::ElasticNet),
            other => Err(Error::InvalidConfig(format!("unknown penalty {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaGrid {
    /// User-supplied, strictly descending.
    Explicit(Vec<f64>),
    /// Log-spaced from `lambda_max` down to `lambda_max * min_ratio`.
    /// `min_ratio: None` picks 1e-3, or 1e-2 when `n < p`.
    Auto {
        n_lambdas: usize,
        min_ratio: Option<f64>,
    },
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Auto {
            n_lambdas: 100,
            min_ratio: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub penalty: Penalty,
    /// Lasso fraction in `[0, 1]`.
    pub mix: f64,
    pub grid: LambdaGrid,
}

impl PenaltySpec {
    pub fn lasso() -> Self {
        Self {
            penalty: Penalty::Lasso,
            mix: 1.0,
            grid: LambdaGrid::default(),
        }
    }

    pub fn ridge() -> Self {
        Self {
            penalty: Penalty::Ridge,
            mix: 0.0,
            grid: LambdaGrid::default(),
        }
    }

    pub fn elastic_net(mix: f64) -> Result<Self> {
        let spec = Self {
            penalty: Penalty::ElasticNet,
            mix,
            grid: LambdaGrid::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_grid(mut self, grid: LambdaGrid) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_lambdas(self, lambdas: Vec<f64>) -> Self {
        self.with_grid(LambdaGrid::Explicit(lambdas))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mix) {
            return Err(Error::InvalidConfig(format!("mix {} outside [0, 1]", self.mix)));
        }
        match self.penalty {
            Penalty::Lasso if self.mix != 1.0 => {
                return Err(Error::InvalidConfig("lasso requires mix = 1".into()))
            }
            Penalty::Ridge if self.mix != 0.0 => {
                return Err(Error::InvalidConfig("ridge requires mix = 0".into()))
            }
            _ => {}
        }
        match &self.grid {
            LambdaGrid::Explicit(l) => validate_lambdas(l),
            LambdaGrid::Auto {
                n_lambdas,
                min_ratio,
            } => {
                if *n_lambdas == 0 {
                    return Err(Error::InvalidGrid("n_lambdas must be at least 1".into()));
                }
                if let Some(r) = min_ratio {
                    if !(*r > 0.0 && *r < 1.0) {
                        return Err(Error::InvalidGrid(format!(
                            "lambda_min_ratio {r} outside (0, 1)"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !l.is_finite() || l < 0.0 {
            return Err(Error::InvalidGrid(format!("lambda {l} is not a finite non-negative value")));
        }
        if i > 0 && l >= lambdas[i - 1] {
            return Err(Error::InvalidGrid("lambdas must be strictly descending".into()));
        }
    }
    if lambdas.last() == Some(&0.0) {
        warn!("lambda = 0 is unpenalized; the fit may be ill-posed for collinear features");
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveControl {
    pub max_sweeps: usize,
    /// Bound on the largest absolute coefficient update in a full sweep.
    pub tol: f64,
    /// After each full sweep, iterate over the nonzero coordinates only until
    /// they settle.
    pub active_set: bool,
}

impl Default for SolveControl {
    fn default() -> Self {
        Self {
            max_sweeps: 10_000,
            tol: 1e-9,
            active_set: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StdSolution {
    pub lambda: f64,
    pub beta_std: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
    /// Largest violation of the subgradient optimality conditions.
    pub kkt_residual: f64,
}

/// Penalty term: `lambda * (mix * |beta|_1 + (1 - mix) * |beta|_2^2)`.
pub fn penalty_value(spec: &PenaltySpec, lambda: f64, beta: &[f64]) -> f64 {
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    match spec.penalty {
        Penalty::Lasso => lambda * l1,
        Penalty::Ridge => lambda * l2,
        Penalty::ElasticNet => lambda * (spec.mix * l1 + (1.0 - spec.mix) * l2),
    }
}

/// Full penalized objective on the standardized scale.
pub fn objective(
    problem: &StandardizedProblem,
    spec: &PenaltySpec,
    lambda: f64,
    beta_std: &[f64],
) -> Result<f64> {
    Ok(loss_from_stats(problem, beta_std)? + penalty_value(spec, lambda, beta_std))
}

/// Smallest lambda at which `beta = 0` is optimal: `2 max |b_j| / mix`,
/// rounded up so that `lambda_max * mix` still covers `2 max |b_j|`.
pub fn lambda_max(problem: &StandardizedProblem, spec: &PenaltySpec) -> Result<f64> {
    if spec.mix <= 0.0 {
        return Err(Error::NoLambdaMax);
    }
    let bound = 2.0 * max_abs(&problem.b);
    let mut lambda = bound / spec.mix;
    while lambda * spec.mix < bound {
        lambda = lambda.next_up();
    }
    Ok(lambda)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A resolved lambda grid together with how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGrid {
    pub lambdas: Vec<f64>,
    pub auto: bool,
    pub lambda_max: Option<f64>,
    pub min_ratio: Option<f64>,
}

/// Resolves `spec.grid` against `problem`.
///
/// For pure ridge an automatic grid starts from the lasso `lambda_max` of the
/// same `b`.
pub fn lambda_grid(problem: &StandardizedProblem, spec: &PenaltySpec) -> Result<ResolvedGrid> {
    spec.validate()?;
    match &spec.grid {
        LambdaGrid::Explicit(l) => Ok(ResolvedGrid {
            lambdas: l.clone(),
            auto: false,
            lambda_max: None,
            min_ratio: None,
        }),
        LambdaGrid::Auto {
            n_lambdas,
            min_ratio,
        } => {
            let top = match lambda_max(problem, spec) {
                Ok(l) => l,
                Err(Error::NoLambdaMax) => {
                    warn!("pure ridge: automatic grid anchored at the lasso lambda_max");
                    2.0 * max_abs(&problem.b)
                }
                Err(e) => return Err(e),
            };
            if !(top > 0.0) || !top.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "degenerate grid: lambda_max = {top} (response orthogonal to every feature)"
                )));
            }
            let ratio = min_ratio.unwrap_or(if (problem.n as usize) < problem.p_active() {
                1e-2
            } else {
                1e-3
            });
            let lambdas = log_spaced(top, ratio, *n_lambdas);
            Ok(ResolvedGrid {
                lambdas,
                auto: true,
                lambda_max: Some(top),
                min_ratio: Some(ratio),
            })
        }
    }
}

fn log_spaced(top: f64, ratio: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![top];
    }
    let step = ratio.ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| top * (step * i as f64).exp()).collect();
    out[0] = top;
    out[count - 1] = top * ratio;
    out
}

/// `S(z, t) = sign(z) max(|z| - t, 0)`; `|z| == t` maps to zero.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Maximum violation of the subgradient conditions at `beta_std`.
pub fn kkt_residual(problem: &StandardizedProblem, mix: f64, lambda: f64, beta_std: &[f64]) -> f64 {
    let residual = residual_correlation(problem, beta_std);
    kkt_from_residual(&residual, mix, lambda, beta_std)
}

fn kkt_from_residual(residual: &[f64], mix: f64, lambda: f64, beta: &[f64]) -> f64 {
    let l1 = lambda * mix;
    let l2 = lambda * (1.0 - mix);
    residual
        .iter()
        .zip(beta)
        .map(|(&r, &bj)| {
            let z = 2.0 * r - 2.0 * l2 * bj;
            if bj != 0.0 {
                (z - l1 * bj.signum()).abs()
            } else {
                (z.abs() - l1).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `b - g beta`.
fn residual_correlation(problem: &StandardizedProblem, beta: &[f64]) -> Vec<f64> {
    (0..problem.p_active())
        .map(|i| {
            let gb: f64 = problem.g_row(i).iter().zip(beta).map(|(g, b)| g * b).sum();
            problem.b[i] - gb
        })
        .collect()
}

pub fn coordinate_descent(
    problem: &StandardizedProblem,
    spec: &PenaltySpec,
    lambda: f64,
    warm_start: Option<&[f64]>,
    control: &SolveControl,
) -> Result<StdSolution> {
    coordinate_descent_observed(problem, spec, lambda, warm_start, control, |_| {})
}

/// [`coordinate_descent`] with a callback receiving the coefficients after
/// every sweep.
pub fn coordinate_descent_observed<F>(
    problem: &StandardizedProblem,
    spec: &PenaltySpec,
    lambda: f64,
    warm_start: Option<&[f64]>,
    control: &SolveControl,
    mut observer: F,
) -> Result<StdSolution>
where
    F: FnMut(&[f64]),
{
    let q = problem.p_active();
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::SolverFault {
            lambda,
            reason: "lambda must be finite and non-negative".into(),
        });
    }
    if control.max_sweeps == 0 || !(control.tol > 0.0) {
        return Err(Error::InvalidConfig("max_sweeps >= 1 and tol > 0 required".into()));
    }
    let mut beta = match warm_start {
        Some(w) if w.len() != q => {
            return Err(Error::DimensionMismatch {
                expected: q,
                found: w.len(),
            })
        }
        Some(w) => w.to_vec(),
        None => vec![0.0; q],
    };
    let l1 = lambda * spec.mix;
    let l2 = lambda * (1.0 - spec.mix);
    let mut residual = residual_correlation(problem, &beta);

    let fault = |reason: &str| Error::SolverFault {
        lambda,
        reason: reason.into(),
    };

    let sweep = |beta: &mut [f64], residual: &mut [f64], active_only: bool| -> Result<f64> {
        let mut max_change = 0.0f64;
        for j in 0..q {
            let old = beta[j];
            if active_only && old == 0.0 {
                continue;
            }
            let gjj = problem.g(j, j);
            let z = 2.0 * (residual[j] + gjj * old);
            let new = soft_threshold(z, l1) / (2.0 * gjj + 2.0 * l2);
            if !new.is_finite() {
                return Err(fault("non-finite coordinate update"));
            }
            let delta = new - old;
            if delta != 0.0 {
                beta[j] = new;
                for (r, g) in residual.iter_mut().zip(problem.g_row(j)) {
                    *r -= delta * g;
                }
                max_change = max_change.max(delta.abs());
            }
        }
        Ok(max_change)
    };

    let mut sweeps = 0;
    let mut kkt = f64::INFINITY;
    let mut converged = false;
    while sweeps < control.max_sweeps {
        let change = sweep(&mut beta, &mut residual, false)?;
        sweeps += 1;
        observer(&beta);
        if change <= control.tol {
            // Refresh the incrementally maintained correlations before judging.
            residual = residual_correlation(problem, &beta);
            kkt = kkt_from_residual(&residual, spec.mix, lambda, &beta);
            if !kkt.is_finite() {
                return Err(fault("non-finite optimality residual"));
            }
            if kkt <= 10.0 * control.tol {
                converged = true;
                break;
            }
            continue;
        }
        if control.active_set {
            while sweeps < control.max_sweeps {
                let change = sweep(&mut beta, &mut residual, true)?;
                sweeps += 1;
                observer(&beta);
                if change <= control.tol {
                    break;
                }
            }
        }
    }
    if !converged {
        kkt = kkt_residual(problem, spec.mix, lambda, &beta);
        if !kkt.is_finite() {
            return Err(fault("non-finite optimality residual"));
        }
    }
    Ok(StdSolution {
        lambda,
        beta_std: beta,
        sweeps_used: sweeps,
        converged,
        kkt_residual: kkt,
    })
}

/// Solves every lambda in descending order, each warm-started from the last
/// successful solution. A fault at one lambda does not stop the rest.
pub fn solve_path(
    problem: &StandardizedProblem,
    spec: &PenaltySpec,
    lambdas: &[f64],
    control: &SolveControl,
) -> Result<Vec<Result<StdSolution>>> {
    if lambdas.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidGrid("lambdas must be strictly descending".into()));
    }
    let mut warm: Option<Vec<f64>> = None;
    let mut out = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let sol = coordinate_descent(problem, spec, lambda, warm.as_deref(), control);
        if let Ok(s) = &sol {
            warm = Some(s.beta_std.clone());
        }
        out.push(sol);
    }
    Ok(out)
}

/// `(g + lambda I)^-1 b` by Cholesky.
pub fn ridge_closed_form(problem: &StandardizedProblem, lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::Numerical(format!("ridge closed form needs lambda > 0, got {lambda}")));
    }
    let q = problem.p_active();
    let a = DMatrix::from_fn(q, q, |i, j| problem.g(i, j) + if i == j { lambda } else { 0.0 });
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numerical("g + lambda I is not positive definite".into()))?;
    let x = chol.solve(&DVector::from_column_slice(&problem.b));
    Ok(x.iter().copied().collect())
}
