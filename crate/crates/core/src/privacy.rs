//! Laplace reporting mechanism for ε-local differential privacy.
//!
//! Each record `x[i]` in a box `∏ [lo_j, hi_j]` is released as
//! `z[i] = x[i] + n[i]` where the coordinates of `n[i]` are independent
//! Laplace variables with scale `b_j = q (hi_j - lo_j) / ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Per-dimension bounds of the data support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SupportBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::param("support box must have at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::param(format!(
                "support bounds have mismatched lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::param(format!("support bound of dimension {j} is not finite")));
            }
            if lo > hi {
                return Err(Error::param(format!(
                    "support dimension {j} has lower bound {lo} above upper bound {hi}"
                )));
            }
        }
        Ok(SupportBox { lower, upper })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Multiplies every bound by `c` (used for homogeneity checks).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let (a, b): (Vec<f64>, Vec<f64>) = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| if c >= 0.0 { (lo * c, hi * c) } else { (hi * c, lo * c) })
            .unzip();
        Self::new(a, b)
    }
}

/// Privacy budget and the Laplace scales it induces on a support box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    epsilon: f64,
    scales: Vec<f64>,
    support: SupportBox,
}

impl PrivacyParams {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }

    pub fn dim(&self) -> usize {
        self.scales.len()
    }
}

/// Scales `b_j = q (hi_j - lo_j) / ε`. An infinite ε yields zero noise.
pub fn laplace_scales(support: &SupportBox, epsilon: f64) -> Result<PrivacyParams> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    let q = support.dim() as f64;
    let scales = support.widths().map(|w| if w == 0.0 { 0.0 } else { q * w / epsilon }).collect();
    Ok(PrivacyParams { epsilon, scales, support: support.clone() })
}

/// Inverse-CDF Laplace draw with scale `b` from a uniform `u` in (0, 1).
pub fn sample_laplace(b: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::param(format!("uniform draw must lie in (0, 1), got {u}")));
    }
    if b.is_nan() || b < 0.0 {
        return Err(Error::param(format!("Laplace scale must be nonnegative, got {b}")));
    }
    Ok(laplace_quantile(b, u))
}

#[inline]
fn laplace_quantile(b: f64, u: f64) -> f64 {
    let c = u - 0.5;
    if c == 0.0 || b == 0.0 {
        return 0.0;
    }
    -b * c.signum() * (-2.0 * c.abs()).ln_1p()
}

/// CDF of the zero-mean Laplace law with scale `b > 0`.
pub fn laplace_cdf(b: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / b).exp()
    } else {
        1.0 - 0.5 * (-x / b).exp()
    }
}

/// Raw or privatized numeric records stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<f64>,
    dim: usize,
    column_names: Vec<String>,
    privatized: bool,
    seed: Option<u64>,
}

impl Dataset {
    pub fn new(records: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dataset dimension must be at least 1"));
        }
        if records.is_empty() {
            return Err(Error::param("dataset must contain at least one record"));
        }
        if records.len() % dim != 0 {
            return Err(Error::param(format!(
                "{} values do not form rows of length {dim}",
                records.len()
            )));
        }
        if let Some(pos) = records.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "non-finite value in record {} column {}",
                pos / dim,
                pos % dim
            )));
        }
        let column_names = (0..dim).map(|j| format!("x{j}")).collect();
        Ok(Dataset { records, dim, column_names, privatized: false, seed: None })
    }

    /// One-dimensional dataset.
    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::param(format!("row {i} does not have {dim} entries")));
        }
        Self::new(rows.concat(), dim)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim {
            return Err(Error::param(format!(
                "{} column names given for {} columns",
                names.len(),
                self.dim
            )));
        }
        self.column_names = names;
        Ok(self)
    }

    /// Marks records as already privatized (e.g. read back from disk).
    pub fn mark_privatized(mut self, seed: Option<u64>) -> Self {
        self.privatized = true;
        self.seed = seed;
        self
    }

    pub fn n(&self) -> usize {
        self.records.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[f64] {
        &self.records
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.records[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.records.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn is_privatized(&self) -> bool {
        self.privatized
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Sample standard deviation of every column (zero for a single record).
    pub fn std_devs(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.dim)
            .map(|j| {
                if self.n() < 2 {
                    return 0.0;
                }
                let mean = self.rows().map(|r| r[j]).sum::<f64>() / n;
                let ss = self.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>();
                (ss / (n - 1.0)).sqrt()
            })
            .collect()
    }

    /// Subset of rows in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut records = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            records.extend_from_slice(self.row(i));
        }
        let mut out = Self::new(records, self.dim)?;
        out.column_names = self.column_names.clone();
        out.privatized = self.privatized;
        out.seed = self.seed;
        Ok(out)
    }

    /// Fails with the first record found outside `support`.
    pub fn check_support(&self, support: &SupportBox) -> Result<()> {
        if support.dim() != self.dim {
            return Err(Error::param(format!(
                "support has {} dimensions but data has {}",
                support.dim(),
                self.dim
            )));
        }
        match self.rows().position(|r| !support.contains(r)) {
            Some(i) => Err(Error::data(format!(
                "record {i} ({:?}) lies outside the declared support; pass --clamp to clip it",
                self.row(i)
            ))),
            None => Ok(()),
        }
    }

    /// Clips every coordinate into `support`; returns the clipped data and the
    /// number of values that moved.
    pub fn clamp_to(&self, support: &SupportBox) -> Result<(Self, usize)> {
        if support.dim() != self.dim {
            return Err(Error::param(format!(
                "support has {} dimensions but data has {}",
                support.dim(),
                self.dim
            )));
        }
        let mut moved = 0;
        let mut out = self.clone();
        for row in out.records.chunks_exact_mut(self.dim) {
            for (j, v) in row.iter_mut().enumerate() {
                let c = v.clamp(support.lower[j], support.upper[j]);
                if c != *v {
                    moved += 1;
                    *v = c;
                }
            }
        }
        Ok((out, moved))
    }
}

/// Adds independent Laplace noise to every coordinate of every record.
///
/// Draws for record `i` come from substream `i` of `seed`, so the output does
/// not depend on the number of worker threads. Records must lie inside the
/// support the parameters were built from.
pub fn privatize(data: &Dataset, params: &PrivacyParams, seed: u64) -> Result<Dataset> {
    if data.privatized {
        return Err(Error::param("dataset is already privatized"));
    }
    if data.dim != params.dim() {
        return Err(Error::param(format!(
            "data has {} columns but privacy parameters cover {}",
            data.dim,
            params.dim()
        )));
    }
    data.check_support(&params.support)?;
    let dim = data.dim;
    let scales = &params.scales;
    let mut records = data.records.clone();
    records.par_chunks_exact_mut(dim).enumerate().for_each(|(i, row)| {
        let mut stream = rng::substream(seed, Domain::Privatize, i as u64);
        for (v, &b) in row.iter_mut().zip(scales) {
            *v += laplace_quantile(b, rng::open_unit(&mut stream));
        }
    });
    Ok(Dataset {
        records,
        dim,
        column_names: data.column_names.clone(),
        privatized: true,
        seed: Some(seed),
    })
}
