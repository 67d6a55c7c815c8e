//! Additive sufficient statistics for least squares.
//!
//! A [`SufficientStats`] holds `n`, `sum(y)`, `sum(y^2)`, `sum(x)`, `X^T y` and
//! `X^T X` for some set of rows. Two sets of rows combine by component-wise
//! addition, which is what makes a single streaming pass enough: per-row
//! statistics are folded into per-fold totals and never revisited.

use serde::{Deserialize, Serialize};

use crate::error::{Error, RecordRejection, Result};

/// One observation: `p` feature values and a response.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Rejects NaN/Inf. Feature `j` reports column `j`; the response reports
    /// column `p`.
    pub fn check_finite(&self) -> Result<(), RecordRejection> {
        if let Some(column) = self.x.iter().position(|v| !v.is_finite()) {
            return Err(RecordRejection::NonFinite { column });
        }
        if !self.y.is_finite() {
            return Err(RecordRejection::NonFinite { column: self.x.len() });
        }
        Ok(())
    }
}

/// Number of entries in the packed upper triangle of a `p x p` matrix.
#[inline]
pub fn packed_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Offset of `(i, j)` with `i <= j` in the row-major packed upper triangle.
#[inline]
pub fn packed_index(p: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < p);
    i * (2 * p - i + 1) / 2 + (j - i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: u64,
    pub sum_y: f64,
    pub sum_yy: f64,
    pub sum_x: Vec<f64>,
    pub xty: Vec<f64>,
    /// Upper triangle of `X^T X`, row-major.
    pub xtx_upper: Vec<f64>,
}

impl SufficientStats {
    /// The merge identity for dimension `p`.
    pub fn zero(p: usize) -> Self {
        Self {
            n: 0,
            sum_y: 0.0,
            sum_yy: 0.0,
            sum_x: vec![0.0; p],
            xty: vec![0.0; p],
            xtx_upper: vec![0.0; packed_len(p)],
        }
    }

    /// Statistics of a single sample: `[1, x, y, y^2, y*x, x x^T]`.
    pub fn of_sample(sample: &Sample) -> Result<Self> {
        sample.check_finite()?;
        let p = sample.dim();
        let mut stats = Self::zero(p);
        stats.push_unchecked(&sample.x, sample.y);
        Ok(stats)
    }

    /// Statistics of a batch of rows, accumulated in row order.
    pub fn from_rows<'a, I>(p: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        let mut stats = Self::zero(p);
        for (x, y) in rows {
            stats.push(x, y)?;
        }
        Ok(stats)
    }

    pub fn dim(&self) -> usize {
        self.sum_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Adds one row in place. Equivalent to `merge(self, of_sample(row))`
    /// bit for bit.
    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if let Some(column) = x.iter().position(|v| !v.is_finite()) {
            return Err(RecordRejection::NonFinite { column }.into());
        }
        if !y.is_finite() {
            return Err(RecordRejection::NonFinite { column: x.len() }.into());
        }
        self.push_unchecked(x, y);
        Ok(())
    }

    fn push_unchecked(&mut self, x: &[f64], y: f64) {
        let p = x.len();
        self.n += 1;
        self.sum_y += y;
        self.sum_yy += y * y;
        let mut offset = 0;
        for i in 0..p {
            let xi = x[i];
            self.sum_x[i] += xi;
            self.xty[i] += y * xi;
            let row = &mut self.xtx_upper[offset..offset + (p - i)];
            for (cell, &xj) in row.iter_mut().zip(&x[i..]) {
                *cell += xi * xj;
            }
            offset += p - i;
        }
    }

    /// Component-wise sum.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    /// In-place component-wise sum. Each component is computed as
    /// `self + other`, so `a.merge(b)` and `b.merge(a)` agree exactly.
    pub fn merge_from(&mut self, other: &Self) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.n += other.n;
        self.sum_y += other.sum_y;
        self.sum_yy += other.sum_yy;
        add_into(&mut self.sum_x, &other.sum_x);
        add_into(&mut self.xty, &other.xty);
        add_into(&mut self.xtx_upper, &other.xtx_upper);
        Ok(())
    }

    /// Entry `(i, j)` of `X^T X`.
    pub fn xtx(&self, i: usize, j: usize) -> f64 {
        let p = self.dim();
        if i <= j {
            self.xtx_upper[packed_index(p, i, j)]
        } else {
            self.xtx_upper[packed_index(p, j, i)]
        }
    }

    /// Dense row-major `p x p` view of `X^T X`. Symmetric by construction.
    pub fn xtx_full(&self) -> Vec<f64> {
        let p = self.dim();
        let mut full = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let v = self.xtx_upper[packed_index(p, i, j)];
                full[i * p + j] = v;
                full[j * p + i] = v;
            }
        }
        full
    }

    /// Column means `sum_x / n`; `None` when empty.
    pub fn mean_x(&self) -> Option<Vec<f64>> {
        if self.n == 0 {
            return None;
        }
        let n = self.n as f64;
        Some(self.sum_x.iter().map(|s| s / n).collect())
    }

    /// Response mean `sum_y / n`; `None` when empty.
    pub fn mean_y(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum_y / self.n as f64)
    }
}

fn add_into(acc: &mut [f64], other: &[f64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a += b;
    }
}

/// Streaming accumulator with optional Kahan-compensated summation.
///
/// Without compensation this is exactly [`SufficientStats::push`].
#[derive(Debug, Clone)]
pub struct StatsAccumulator {
    stats: SufficientStats,
    carry: Option<SufficientStats>,
}

impl StatsAccumulator {
    pub fn new(p: usize, compensated: bool) -> Self {
        Self {
            stats: SufficientStats::zero(p),
            carry: compensated.then(|| SufficientStats::zero(p)),
        }
    }

    pub fn dim(&self) -> usize {
        self.stats.dim()
    }

    pub fn n(&self) -> u64 {
        self.stats.n
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        let Some(carry) = self.carry.as_mut() else {
            return self.stats.push(x, y);
        };
        if x.len() != self.stats.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.stats.dim(),
                found: x.len(),
            });
        }
        Sample::new(x.to_vec(), y).check_finite()?;
        let s = &mut self.stats;
        let p = x.len();
        s.n += 1;
        kahan(&mut s.sum_y, &mut carry.sum_y, y);
        kahan(&mut s.sum_yy, &mut carry.sum_yy, y * y);
        let mut offset = 0;
        for i in 0..p {
            let xi = x[i];
            kahan(&mut s.sum_x[i], &mut carry.sum_x[i], xi);
            kahan(&mut s.xty[i], &mut carry.xty[i], y * xi);
            for (j, &xj) in x.iter().enumerate().skip(i) {
                let k = offset + j - i;
                kahan(&mut s.xtx_upper[k], &mut carry.xtx_upper[k], xi * xj);
            }
            offset += p - i;
        }
        Ok(())
    }

    pub fn finish(self) -> SufficientStats {
        let mut stats = self.stats;
        if let Some(carry) = self.carry {
            stats.sum_y -= carry.sum_y;
            stats.sum_yy -= carry.sum_yy;
            sub_into(&mut stats.sum_x, &carry.sum_x);
            sub_into(&mut stats.xty, &carry.xty);
            sub_into(&mut stats.xtx_upper, &carry.xtx_upper);
        }
        stats
    }
}

fn sub_into(acc: &mut [f64], other: &[f64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a -= b;
    }
}

#[inline]
fn kahan(sum: &mut f64, carry: &mut f64, value: f64) {
    let y = value - *carry;
    let t = *sum + y;
    *carry = (t - *sum) - y;
    *sum = t;
}
