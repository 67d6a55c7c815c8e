//! Centering and unit-length scaling computed from statistics alone.
//!
//! Writing the design as `X = Xc D + 1 m^T` (column means `m`, centered column
//! norms on the diagonal of `D`), the penalized problem is solved on `Xc`.
//! Its quadratic form only needs
//!
//! ```text
//! g   = D^-1 (X^T X - n m m^T) D^-1
//! b   = D^-1 (X^T y - n ybar m)
//! tss = y^T y - n ybar^2
//! ```
//!
//! all of which follow from [`SufficientStats`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::SufficientStats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardizeOptions {
    /// Fit an intercept. When false, neither `X` nor `y` is centered.
    pub intercept: bool,
    /// Relative degeneracy threshold for dropping columns.
    pub epsilon: f64,
}

impl Default for StandardizeOptions {
    fn default() -> Self {
        Self {
            intercept: true,
            epsilon: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Zero (or round-off level) spread after centering.
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub column: usize,
    pub reason: DropReason,
}

/// The standardized Gram system for the retained columns plus the metadata
/// needed to map a solution back to raw units.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedProblem {
    pub n: u64,
    pub intercept: bool,
    /// Active position -> original column.
    pub active: Vec<usize>,
    pub dropped: Vec<DroppedColumn>,
    /// Column means over all `p` columns (zero without intercept).
    pub means: Vec<f64>,
    /// Column scale over all `p` columns; zero or tiny for dropped ones.
    pub norms: Vec<f64>,
    pub y_mean: f64,
    /// Row-major `p_active x p_active`.
    pub g: Vec<f64>,
    pub b: Vec<f64>,
    pub tss: f64,
}

impl StandardizedProblem {
    pub fn p(&self) -> usize {
        self.means.len()
    }

    pub fn p_active(&self) -> usize {
        self.active.len()
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.active.len() + j]
    }

    /// Row `i` of `g`.
    #[inline]
    pub fn g_row(&self, i: usize) -> &[f64] {
        let q = self.active.len();
        &self.g[i * q..(i + 1) * q]
    }
}

pub fn standardize(stats: &SufficientStats, options: StandardizeOptions) -> Result<StandardizedProblem> {
    let needed = if options.intercept { 2 } else { 1 };
    if stats.n < needed {
        return Err(Error::InsufficientData {
            needed,
            got: stats.n,
        });
    }
    let p = stats.dim();
    let n = stats.n as f64;

    let (means, y_mean) = if options.intercept {
        (stats.sum_x.iter().map(|s| s / n).collect(), stats.sum_y / n)
    } else {
        (vec![0.0; p], 0.0)
    };

    // Centered cross products: X^T X - n m m^T and X^T y - n ybar m.
    let centered = |i: usize, j: usize| stats.xtx(i, j) - n * means[i] * means[j];
    let norms: Vec<f64> = (0..p).map(|j| centered(j, j).max(0.0).sqrt()).collect();

    let mut active = Vec::with_capacity(p);
    let mut dropped = Vec::new();
    for (j, &d) in norms.iter().enumerate() {
        if d * d <= options.epsilon * (stats.xtx(j, j) + 1.0) {
            dropped.push(DroppedColumn {
                column: j,
                reason: DropReason::ZeroVariance,
            });
        } else {
            active.push(j);
        }
    }
    if active.is_empty() {
        return Err(Error::EmptyModel);
    }

    let q = active.len();
    let mut g = vec![0.0; q * q];
    for (a, &i) in active.iter().enumerate() {
        g[a * q + a] = 1.0;
        for (c, &j) in active.iter().enumerate().skip(a + 1) {
            let v = centered(i, j) / (norms[i] * norms[j]);
            g[a * q + c] = v;
            g[c * q + a] = v;
        }
    }
    let b = active
        .iter()
        .map(|&j| (stats.xty[j] - n * y_mean * means[j]) / norms[j])
        .collect();
    let tss = stats.sum_yy - n * y_mean * y_mean;

    Ok(StandardizedProblem {
        n: stats.n,
        intercept: options.intercept,
        active,
        dropped,
        means,
        norms,
        y_mean,
        g,
        b,
        tss,
    })
}

/// `||y - ybar - Xc beta||^2` evaluated as `tss - 2 b^T beta + beta^T g beta`.
pub fn loss_from_stats(problem: &StandardizedProblem, beta_std: &[f64]) -> Result<f64> {
    let q = problem.p_active();
    if beta_std.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: beta_std.len(),
        });
    }
    let mut linear = 0.0;
    let mut quad = 0.0;
    for i in 0..q {
        linear += problem.b[i] * beta_std[i];
        let row = problem.g_row(i);
        let gb: f64 = row.iter().zip(beta_std).map(|(g, b)| g * b).sum();
        quad += beta_std[i] * gb;
    }
    Ok(problem.tss - 2.0 * linear + quad)
}
