//! Test fixtures and row-level reference implementations.
//!
//! Everything here works on explicit row matrices, never on
//! `SufficientStats`, so it can serve as an oracle for the statistics path.
#![allow(dead_code)]

use std::io::Write;
use std::path::Path;

use penreg::solver::{lambda_grid, solve_path, PenaltySpec, SolveControl};
use penreg::standardize::StandardizedProblem;
use penreg::{assign_fold, LinearModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rows = Vec<(Vec<f64>, f64)>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random regression data with per-column offsets and scales, a sparse
/// true coefficient vector, and Gaussian noise.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Rows {
    let offsets: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
    let scales: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..5.0)).collect();
    let beta: Vec<f64> = (0..p)
        .map(|_| if rng.random_bool(0.6) { rng.random_range(-2.0..2.0) } else { 0.0 })
        .collect();
    let intercept = rng.random_range(-5.0..5.0);
    let noise = rng.random_range(0.1..2.0);
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..p).map(|j| offsets[j] + scales[j] * normal(rng)).collect();
            let y = intercept + x.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + noise * normal(rng);
            (x, y)
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[(Vec<f64>, f64)], header: bool) {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).unwrap());
    let p = rows.first().map_or(0, |r| r.0.len());
    if header {
        let names: Vec<String> = (0..p).map(|j| format!("x{j}")).chain(["y".into()]).collect();
        writeln!(f, "{}", names.join(",")).unwrap();
    }
    for (x, y) in rows {
        let fields: Vec<String> = x.iter().chain([y]).map(|v| format!("{v:?}")).collect();
        writeln!(f, "{}", fields.join(",")).unwrap();
    }
    f.flush().unwrap();
}

/// Splits `rows` into `parts` contiguous chunks (ordinals preserved) and
/// writes each with a header.
pub fn write_shards(dir: &Path, stem: &str, rows: &[(Vec<f64>, f64)], parts: usize) -> Vec<std::path::PathBuf> {
    let chunk = rows.len().div_ceil(parts);
    (0..parts)
        .map(|i| {
            let path = dir.join(format!("{stem}-{i}.csv"));
            let lo = (i * chunk).min(rows.len());
            let hi = ((i + 1) * chunk).min(rows.len());
            write_csv(&path, &rows[lo..hi], true);
            path
        })
        .collect()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Explicitly centered and unit-scaled design for `rows`.
pub struct ExplicitStandardization {
    pub means: Vec<f64>,
    pub norms: Vec<f64>,
    pub y_mean: f64,
    pub active: Vec<usize>,
    /// Active columns of `Xc`, one vector per column.
    pub columns: Vec<Vec<f64>>,
    pub y_centered: Vec<f64>,
}

pub fn explicit_standardize(rows: &[(Vec<f64>, f64)], intercept: bool, epsilon: f64) -> ExplicitStandardization {
    let n = rows.len() as f64;
    let p = rows[0].0.len();
    let means: Vec<f64> = (0..p)
        .map(|j| if intercept { rows.iter().map(|r| r.0[j]).sum::<f64>() / n } else { 0.0 })
        .collect();
    let y_mean = if intercept { rows.iter().map(|r| r.1).sum::<f64>() / n } else { 0.0 };
    let centered: Vec<Vec<f64>> = (0..p)
        .map(|j| rows.iter().map(|r| r.0[j] - means[j]).collect())
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let raw_sq: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r.0[j] * r.0[j]).sum()).collect();
    let active: Vec<usize> = (0..p).filter(|&j| norms[j] * norms[j] > epsilon * (raw_sq[j] + 1.0)).collect();
    let columns = active
        .iter()
        .map(|&j| centered[j].iter().map(|v| v / norms[j]).collect())
        .collect();
    ExplicitStandardization {
        means,
        norms,
        y_mean,
        active,
        columns,
        y_centered: rows.iter().map(|r| r.1 - y_mean).collect(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ExplicitStandardization {
    /// Gram system by explicit matrix products.
    pub fn problem(&self, n: u64, intercept: bool) -> StandardizedProblem {
        let q = self.columns.len();
        let mut g = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..q {
                g[i * q + j] = dot(&self.columns[i], &self.columns[j]);
            }
        }
        StandardizedProblem {
            n,
            intercept,
            active: self.active.clone(),
            dropped: vec![],
            means: self.means.clone(),
            norms: self.norms.clone(),
            y_mean: self.y_mean,
            g,
            b: self.columns.iter().map(|c| dot(c, &self.y_centered)).collect(),
            tss: dot(&self.y_centered, &self.y_centered),
        }
    }

    /// `||y - ybar - Xc beta||^2` row by row.
    pub fn rss(&self, beta_std: &[f64]) -> f64 {
        self.y_centered
            .iter()
            .enumerate()
            .map(|(r, y)| {
                let fit: f64 = self.columns.iter().zip(beta_std).map(|(c, b)| c[r] * b).sum();
                (y - fit).powi(2)
            })
            .sum()
    }

    pub fn to_raw(&self, beta_std: &[f64], intercept: bool) -> LinearModel {
        let p = self.means.len();
        let mut coefficients = vec![0.0; p];
        for (&j, b) in self.active.iter().zip(beta_std) {
            coefficients[j] = b / self.norms[j];
        }
        let intercept = if intercept {
            self.y_mean - dot(&self.means, &coefficients)
        } else {
            0.0
        };
        LinearModel {
            intercept,
            coefficients,
        }
    }
}

pub fn rowwise_mse(rows: &[(Vec<f64>, f64)], model: &LinearModel) -> f64 {
    rows.iter().map(|(x, y)| (y - model.predict(x)).powi(2)).sum::<f64>() / rows.len() as f64
}

pub struct ReferenceFit {
    pub lambdas: Vec<f64>,
    pub mean_mse: Vec<f64>,
    pub lambda_opt: f64,
    pub model: LinearModel,
}

/// Cross validation over explicit fold submatrices with the library solver.
pub fn reference_pipeline(
    rows: &[(Vec<f64>, f64)],
    k: usize,
    seed: u64,
    spec: &PenaltySpec,
    control: &SolveControl,
) -> ReferenceFit {
    let eps = 1e-12;
    let keys: Vec<usize> = (0..rows.len()).map(|i| assign_fold(i as u64, seed, k)).collect();
    let all = explicit_standardize(rows, true, eps);
    let lambdas = lambda_grid(&all.problem(rows.len() as u64, true), spec).unwrap().lambdas;

    let mut sums = vec![0.0; lambdas.len()];
    let mut scored = 0usize;
    for fold in 0..k {
        let test: Rows = rows.iter().zip(&keys).filter(|(_, &f)| f == fold).map(|(r, _)| r.clone()).collect();
        if test.is_empty() {
            continue;
        }
        let train: Rows = rows.iter().zip(&keys).filter(|(_, &f)| f != fold).map(|(r, _)| r.clone()).collect();
        let st = explicit_standardize(&train, true, eps);
        let problem = st.problem(train.len() as u64, true);
        let path = solve_path(&problem, spec, &lambdas, control).unwrap();
        for (l, sol) in path.into_iter().enumerate() {
            let sol = sol.unwrap();
            assert!(sol.converged);
            sums[l] += rowwise_mse(&test, &st.to_raw(&sol.beta_std, true));
        }
        scored += 1;
    }
    let mean_mse: Vec<f64> = sums.iter().map(|s| s / scored as f64).collect();
    let mut best = 0;
    for l in 1..lambdas.len() {
        if mean_mse[l] < mean_mse[best] {
            best = l;
        }
    }
    let problem = all.problem(rows.len() as u64, true);
    let path = solve_path(&problem, spec, &lambdas[..=best], control).unwrap();
    let sol = path.into_iter().last().unwrap().unwrap();
    ReferenceFit {
        lambda_opt: lambdas[best],
        model: all.to_raw(&sol.beta_std, true),
        lambdas,
        mean_mse,
    }
}

/// Ordinary least squares with intercept via the normal equations on
/// explicitly centered data (nalgebra LU).
pub fn ols(rows: &[(Vec<f64>, f64)]) -> LinearModel {
    let n = rows.len();
    let p = rows[0].0.len();
    let x = nalgebra::DMatrix::from_fn(n, p + 1, |r, c| if c == 0 { 1.0 } else { rows[r].0[c - 1] });
    let y = nalgebra::DVector::from_fn(n, |r, _| rows[r].1);
    let xt = x.transpose();
    let sol = (&xt * &x).lu().solve(&(&xt * y)).unwrap();
    LinearModel {
        intercept: sol[0],
        coefficients: sol.iter().skip(1).copied().collect(),
    }
}

/// Fold statistics built directly from rows with the same fold keys as
/// ingestion.
pub fn folded_from_rows(rows: &[(Vec<f64>, f64)], k: usize, seed: u64) -> penreg::FoldedStats {
    let p = rows[0].0.len();
    let mut folds = penreg::FoldedStats::zero(k, p);
    for (i, (x, y)) in rows.iter().enumerate() {
        folds.folds[assign_fold(i as u64, seed, k)].push(x, *y).unwrap();
    }
    folds.total_records = rows.len() as u64;
    folds
}
