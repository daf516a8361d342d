//! Kernel density estimators for raw and privatized records.
//!
//! * [`kde`]: classical estimate on raw records.
//! * [`naive_kde`]: the same formula applied to privatized records. It
//!   estimates the noise-blurred density.
//! * [`deconv_kde`]: adjusted-kernel estimate that removes the Laplace blur.
//!   Its values may be negative.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accumulate;
use crate::error::{Error, Result};
use crate::kernels::{AdjustedKernel, Kernel, KernelFamily};
use crate::privacy::{Dataset, SupportBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorTag {
    Kde,
    NaiveKde,
    DeconvKde,
}

impl EstimatorTag {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorTag::Kde => "kde",
            EstimatorTag::NaiveKde => "naive_kde",
            EstimatorTag::DeconvKde => "deconv_kde",
        }
    }
}

/// Density values on a set of evaluation points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateGrid {
    /// Row-major `m × dim` abscissae.
    pub points: Vec<f64>,
    pub dim: usize,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub epsilon: Option<f64>,
    pub estimator_tag: EstimatorTag,
    pub kernel: KernelFamily,
    pub seed: Option<u64>,
}

impl EstimateGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    /// Trapezoid integral of the values over a sorted one-dimensional grid.
    pub fn mass(&self) -> Result<f64> {
        check_sorted_1d(self)?;
        Ok(trapezoid(&self.points, &self.values))
    }

    /// Clips negative values to zero and rescales to unit trapezoid mass.
    pub fn clipped_and_renormalized(&self) -> Result<Self> {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = v.max(0.0);
        }
        let mass = out.mass()?;
        if !(mass > 0.0) {
            return Err(Error::numerical("estimate has no positive mass to renormalize"));
        }
        for v in &mut out.values {
            *v /= mass;
        }
        Ok(out)
    }
}

fn check_sorted_1d(grid: &EstimateGrid) -> Result<()> {
    if grid.dim != 1 {
        return Err(Error::param("grid quadrature is only defined for one-dimensional grids"));
    }
    if grid.points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("evaluation grid must be strictly increasing"));
    }
    Ok(())
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn validate(data: &Dataset, kernel: &Kernel, h: f64, grid: &[f64]) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::param(format!("bandwidth must be positive and finite, got {h}")));
    }
    if kernel.dim != data.dim() {
        return Err(Error::param(format!(
            "kernel has dimension {} but data has {}",
            kernel.dim,
            data.dim()
        )));
    }
    if grid.is_empty() || grid.len() % data.dim() != 0 {
        return Err(Error::param("evaluation grid is empty or has the wrong dimension"));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("evaluation grid contains non-finite points"));
    }
    Ok(())
}

/// `(1 / (n h^q)) Σ_i K̂((x - z_i) / h)` at every grid point.
fn evaluate(data: &Dataset, ak: &AdjustedKernel, h: f64, grid: &[f64]) -> Vec<f64> {
    let dim = data.dim();
    let n = data.n() as f64;
    let norm = 1.0 / (n * h.powi(dim as i32));
    let inv_h = 1.0 / h;
    if dim == 1 {
        let r = ak.ratios()[0];
        let family = ak.base().family;
        let zs = data.records();
        return grid
            .par_iter()
            .map(|&x| accumulate::weight_sum_1d(zs, x, inv_h, family, r * r) * norm)
            .collect();
    }
    grid.par_chunks_exact(dim)
        .map(|x| {
            let mut u = vec![0.0; dim];
            let mut sum = 0.0;
            for z in data.rows() {
                for j in 0..dim {
                    u[j] = (x[j] - z[j]) * inv_h;
                }
                sum += ak.value(&u);
            }
            sum * norm
        })
        .collect()
}

fn estimate(
    data: &Dataset,
    kernel: &Kernel,
    h: f64,
    scales: &[f64],
    grid: &[f64],
    tag: EstimatorTag,
) -> Result<EstimateGrid> {
    validate(data, kernel, h, grid)?;
    let ak = AdjustedKernel::for_bandwidth(*kernel, scales, h)?;
    let values = evaluate(data, &ak, h, grid);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("density estimate produced non-finite values"));
    }
    Ok(EstimateGrid {
        points: grid.to_vec(),
        dim: data.dim(),
        values,
        bandwidth: h,
        epsilon: None,
        estimator_tag: tag,
        kernel: kernel.family,
        seed: data.seed(),
    })
}

/// Classical kernel density estimate.
pub fn kde(data: &Dataset, kernel: &Kernel, h: f64, grid: &[f64]) -> Result<EstimateGrid> {
    estimate(data, kernel, h, &vec![0.0; data.dim()], grid, EstimatorTag::Kde)
}

/// Classical estimate applied to privatized records, ignoring the noise.
pub fn naive_kde(zdata: &Dataset, kernel: &Kernel, h: f64, grid: &[f64]) -> Result<EstimateGrid> {
    estimate(zdata, kernel, h, &vec![0.0; zdata.dim()], grid, EstimatorTag::NaiveKde)
}

/// Deconvoluting estimate for records privatized with Laplace scales `scales`.
pub fn deconv_kde(
    zdata: &Dataset,
    kernel: &Kernel,
    h: f64,
    scales: &[f64],
    grid: &[f64],
) -> Result<EstimateGrid> {
    if scales.len() != zdata.dim() {
        return Err(Error::param(format!(
            "{} Laplace scales given for {}-dimensional data",
            scales.len(),
            zdata.dim()
        )));
    }
    estimate(zdata, kernel, h, scales, grid, EstimatorTag::DeconvKde)
}

/// Empirical characteristic function `(1/n) Σ exp(i tᵀ z_i)`.
pub fn empirical_cf(data: &Dataset, t: &[f64]) -> Complex64 {
    let n = data.n() as f64;
    let sum: Complex64 = data
        .rows()
        .map(|z| {
            let phase: f64 = z.iter().zip(t).map(|(a, b)| a * b).sum();
            Complex64::new(phase.cos(), phase.sin())
        })
        .sum();
    sum / n
}

/// Rule-of-thumb bandwidth `1.06 σ̂ n^{-1/5}`.
pub fn default_bandwidth(n: usize, scale: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("bandwidth rule needs at least two records"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::param(format!("dispersion must be positive, got {scale}")));
    }
    Ok(1.06 * scale * (n as f64).powf(-0.2))
}

/// Product grid with `per_dim` points per axis spanning
/// `[lo - 4b - 4h, hi + 4b + 4h]` in every dimension.
pub fn default_grid(support: &SupportBox, scales: &[f64], h: f64, per_dim: usize) -> Result<Vec<f64>> {
    if scales.len() != support.dim() {
        return Err(Error::param("Laplace scales do not match the support dimension"));
    }
    if per_dim < 2 {
        return Err(Error::param("grid needs at least two points per dimension"));
    }
    let axes: Vec<Vec<f64>> = (0..support.dim())
        .map(|j| {
            let pad = 4.0 * scales[j] + 4.0 * h;
            linspace(support.lower()[j] - pad, support.upper()[j] + pad, per_dim)
        })
        .collect();
    let dim = axes.len();
    let total = per_dim.pow(dim as u32);
    let mut points = Vec::with_capacity(total * dim);
    for k in 0..total {
        let mut rem = k;
        let mut idx = vec![0; dim];
        for j in (0..dim).rev() {
            idx[j] = rem % per_dim;
            rem /= per_dim;
        }
        points.extend(idx.iter().enumerate().map(|(j, &i)| axes[j][i]));
    }
    Ok(points)
}

pub fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![a];
    }
    let step = (b - a) / (m - 1) as f64;
    (0..m).map(|i| if i == m - 1 { b } else { a + i as f64 * step }).collect()
}

/// Integrated squared error against `truth` by the trapezoid rule on the grid.
pub fn ise(estimate: &EstimateGrid, truth: impl Fn(f64) -> f64) -> Result<f64> {
    check_sorted_1d(estimate)?;
    let sq: Vec<f64> = estimate.points.iter().zip(&estimate.values).map(|(&x, &v)| (v - truth(x)).powi(2)).collect();
    Ok(trapezoid(&estimate.points, &sq))
}
