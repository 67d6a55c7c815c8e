//! Synthetic workloads shared by the benchmarks.

use penreg::SufficientStats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rows of `y = x . beta + noise` with `beta_j = 1 / (j + 1)`.
pub fn synthetic_rows(n: usize, p: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = x.iter().enumerate().map(|(j, v)| v / (j + 1) as f64).sum::<f64>()
                + 0.1 * rng.random_range(-1.0..1.0);
            (x, y)
        })
        .collect()
}

pub fn stats_of(rows: &[(Vec<f64>, f64)]) -> SufficientStats {
    let p = rows.first().map_or(0, |r| r.0.len());
    SufficientStats::from_rows(p, rows.iter().map(|(x, y)| (&x[..], *y))).expect("finite rows")
}

/// Writes rows as CSV with a header `x0,..,x{p-1},y`.
pub fn write_csv(path: &std::path::Path, rows: &[(Vec<f64>, f64)]) -> std::io::Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let p = rows.first().map_or(0, |r| r.0.len());
    let header: Vec<String> = (0..p).map(|j| format!("x{j}")).chain(["y".to_string()]).collect();
    writeln!(w, "{}", header.join(","))?;
    for (x, y) in rows {
        for v in x {
            write!(w, "{v},")?;
        }
        writeln!(w, "{y}")?;
    }
    w.flush()
}
