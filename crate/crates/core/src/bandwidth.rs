//! Bandwidth selection.
//!
//! Regression bandwidths minimize the summed leave-one-out loss
//! `Σ_j ℓ(y_j, m̂_{-j}(x_j))` over a fixed grid of candidates, where `x_j` is
//! the raw input when known and the privatized one otherwise. Density
//! bandwidths minimize the least-squares cross-validation criterion
//! `∫ f̂² - (2/n) Σ_i g_{-i}(z_i)`, where `g = (1 - b² d²/dz²) f̂` makes the
//! second term unbiased for `∫ f̂ f_x` under Laplace noise. The density
//! criterion is penalized by its estimated standard error.

use std::f64::consts::FRAC_1_PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily, FRAC_1_SQRT_2PI};
use crate::privacy::Dataset;
use crate::regression::{LabeledDataset, Mode, RegressionModel, DEGENERATE_DENOMINATOR, PROB_CLIP};
use crate::rng::{self, Domain};

/// Folds beyond this count are subsampled by default.
pub const LOO_FOLD_CAP: usize = 20_000;
pub const DEFAULT_GRID_LEN: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SquaredError,
    NegLogLikelihood,
}

impl Loss {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Continuous => Loss::SquaredError,
            Mode::Binary => Loss::NegLogLikelihood,
        }
    }

    fn mode(self) -> Mode {
        match self {
            Loss::SquaredError => Mode::Continuous,
            Loss::NegLogLikelihood => Mode::Binary,
        }
    }

    #[inline]
    fn eval(self, y: f64, prediction: f64) -> f64 {
        match self {
            Loss::SquaredError => (y - prediction) * (y - prediction),
            Loss::NegLogLikelihood => {
                let p = prediction.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    grid: Vec<f64>,
    pub loss: Loss,
    /// Maximum number of leave-one-out folds; `None` uses every record.
    pub subsample: Option<usize>,
    pub subsample_seed: u64,
}

impl CvConfig {
    pub fn new(grid: Vec<f64>, loss: Loss) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::param("bandwidth grid is empty"));
        }
        if grid.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::param("bandwidth candidates must be positive and finite"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("bandwidth grid must be strictly increasing"));
        }
        Ok(CvConfig { grid, loss, subsample: Some(LOO_FOLD_CAP), subsample_seed: 0 })
    }

    pub fn with_subsample(mut self, cap: Option<usize>, seed: u64) -> Self {
        self.subsample = cap;
        self.subsample_seed = seed;
        self
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub bandwidth: f64,
    /// Summed leave-one-out loss, `None` when every fold was degenerate.
    pub score: Option<f64>,
    pub degenerate_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub h_star: f64,
    pub scores: Vec<CvScore>,
    pub folds: usize,
    pub subsampled: bool,
    /// The minimum sits at an end of the grid; widening it may help.
    pub boundary_minimum: bool,
}

/// `count` log-spaced values from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max > min) || !max.is_finite() || count < 2 {
        if count == 1 && min > 0.0 && min.is_finite() && (max == min) {
            return Ok(vec![min]);
        }
        return Err(Error::param(format!("invalid bandwidth grid {min}:{max}:{count}")));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..count)
        .map(|k| match k {
            0 => min,
            k if k == count - 1 => max,
            k => (a + (b - a) * k as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

/// 25 log-spaced candidates from `0.05 σ̂ n^{-1/5}` to `50 σ̂ n^{-1/5}`, with
/// the top raised to `4 max_j b_j` when the noise is that wide. `σ̂` is the
/// largest per-column sample standard deviation.
pub fn default_grid(data: &Dataset, scales: &[f64]) -> Result<Vec<f64>> {
    if data.n() < 2 {
        return Err(Error::param("default bandwidth grid needs at least two records"));
    }
    let sigma = data.std_devs().into_iter().fold(0.0, f64::max);
    let max_b = scales.iter().copied().fold(0.0, f64::max);
    let sigma = if sigma > 0.0 { sigma } else { max_b.max(1.0) };
    let base = sigma * (data.n() as f64).powf(-0.2);
    let lo = 0.05 * base;
    let hi = (50.0 * base).max(4.0 * max_b);
    log_grid(lo, hi, DEFAULT_GRID_LEN)
}

fn fold_indices(n: usize, cap: Option<usize>, seed: u64) -> (Vec<usize>, bool) {
    match cap {
        Some(cap) if n > cap => {
            let mut idx: Vec<usize> = (0..n).collect();
            let mut stream = rng::substream(seed, Domain::FoldSubsample, 0);
            for k in 0..cap {
                let pick = stream.random_range(k..n);
                idx.swap(k, pick);
            }
            idx.truncate(cap);
            idx.sort_unstable();
            (idx, true)
        }
        _ => ((0..n).collect(), false),
    }
}

/// Distinct input values with their multiplicities and response sums.
struct Atoms {
    values: Vec<f64>,
    counts: Vec<f64>,
    sums: Vec<f64>,
    of_record: Vec<usize>,
}

impl Atoms {
    fn build(xs: &[f64], ys: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
        let mut atoms = Atoms { values: vec![], counts: vec![], sums: vec![], of_record: vec![0; xs.len()] };
        for i in order {
            if atoms.values.last().map(|v| v.to_bits()) != Some(xs[i].to_bits()) {
                atoms.values.push(xs[i]);
                atoms.counts.push(0.0);
                atoms.sums.push(0.0);
            }
            let k = atoms.values.len() - 1;
            atoms.counts[k] += 1.0;
            atoms.sums[k] += ys[i];
            atoms.of_record[i] = k;
        }
        atoms
    }
}

#[inline(always)]
fn weight(family: KernelFamily, r2: f64, u: f64) -> f64 {
    if r2 == 0.0 {
        family.value_1d(u)
    } else {
        family.adjusted_1d(r2, u)
    }
}

/// `(Σ w c, Σ w s)` over atoms in `range`, with `w = w((x - v) / h)`.
fn atom_sums(atoms: &Atoms, range: std::ops::Range<usize>, x: f64, inv_h: f64, family: KernelFamily, r2: f64) -> (f64, f64) {
    let vs = &atoms.values[range.clone()];
    let cs = &atoms.counts[range.clone()];
    let ss = &atoms.sums[range];
    let mut den = [0.0f64; 4];
    let mut num = [0.0f64; 4];
    let head = vs.len() - vs.len() % 4;
    let mut k = 0;
    while k < head {
        for l in 0..4 {
            let w = weight(family, r2, (x - vs[k + l]) * inv_h);
            den[l] += w * cs[k + l];
            num[l] += w * ss[k + l];
        }
        k += 4;
    }
    let mut d = (den[0] + den[1]) + (den[2] + den[3]);
    let mut s = (num[0] + num[1]) + (num[2] + num[3]);
    for k in head..vs.len() {
        let w = weight(family, r2, (x - vs[k]) * inv_h);
        d += w * cs[k];
        s += w * ss[k];
    }
    (d, s)
}

/// Per-candidate `(loss sum, degenerate folds, folds)`.
type Tally = Vec<(f64, usize, usize)>;

fn cv_tally_1d(
    data: &LabeledDataset,
    queries: &[f64],
    family: KernelFamily,
    b: f64,
    grid: &[f64],
    loss: Loss,
    folds: &[usize],
) -> Tally {
    let zs = data.inputs().records();
    let ys = data.responses();
    let atoms = Atoms::build(zs, ys);
    // folds sharing a query value share the full-sample sums
    let mut order = folds.to_vec();
    order.sort_by(|&a, &b| queries[a].total_cmp(&queries[b]).then(a.cmp(&b)));
    let groups: Vec<&[usize]> = order.chunk_by(|&a, &b| queries[a].to_bits() == queries[b].to_bits()).collect();
    let nearest = |j: usize| -> f64 {
        let mut best = (f64::INFINITY, f64::NAN);
        for (i, &z) in zs.iter().enumerate() {
            if i != j && (z - queries[j]).abs() < best.0 {
                best = ((z - queries[j]).abs(), ys[i]);
            }
        }
        best.1
    };
    let m = atoms.values.len();
    let partials: Vec<Tally> = groups
        .par_iter()
        .map(|group| {
            let v = queries[group[0]];
            grid.iter()
                .map(|&h| {
                    let inv_h = 1.0 / h;
                    let r2 = (b / h) * (b / h);
                    let (den_all, num_all) = atom_sums(&atoms, 0..m, v, inv_h, family, r2);
                    let (mut total, mut degenerate) = (0.0, 0);
                    for &j in group.iter() {
                        let own = weight(family, r2, (v - zs[j]) * inv_h);
                        let den = den_all - own;
                        let num = num_all - own * ys[j];
                        let pred = if den.abs() >= DEGENERATE_DENOMINATOR {
                            num / den
                        } else {
                            degenerate += 1;
                            nearest(j)
                        };
                        total += loss.eval(ys[j], pred);
                    }
                    (total, degenerate, group.len())
                })
                .collect()
        })
        .collect();
    let mut tally = vec![(0.0, 0, 0); grid.len()];
    for part in &partials {
        for (acc, p) in tally.iter_mut().zip(part) {
            acc.0 += p.0;
            acc.1 += p.1;
            acc.2 += p.2;
        }
    }
    tally
}

fn cv_tally_generic(
    data: &LabeledDataset,
    queries: &Dataset,
    kernel: &Kernel,
    scales: &[f64],
    grid: &[f64],
    loss: Loss,
    folds: &[usize],
) -> Result<Tally> {
    grid.iter()
        .map(|&h| {
            let model = RegressionModel::new(data.clone(), *kernel, h, scales, loss.mode())?;
            let per_fold: Vec<(f64, bool)> = folds
                .par_iter()
                .map(|&j| {
                    let p = model.predict_loo(j, queries.row(j))?;
                    Ok((loss.eval(data.responses()[j], p.value), p.degenerate))
                })
                .collect::<Result<_>>()?;
            let total = per_fold.iter().map(|p| p.0).sum();
            let degenerate = per_fold.iter().filter(|p| p.1).count();
            Ok((total, degenerate, folds.len()))
        })
        .collect()
}

/// Leave-one-out bandwidth selection with each held-out record scored at
/// its own (possibly privatized) input. Ties go to the larger bandwidth.
pub fn cv_select(data: &LabeledDataset, kernel: &Kernel, scales: &[f64], cfg: &CvConfig) -> Result<CvOutcome> {
    cv_select_at(data, data.inputs(), kernel, scales, cfg)
}

/// Leave-one-out selection where fold `j` predicts at `queries.row(j)`,
/// typically the raw input `x_j` behind the privatized `z_j`.
pub fn cv_select_at(
    data: &LabeledDataset,
    queries: &Dataset,
    kernel: &Kernel,
    scales: &[f64],
    cfg: &CvConfig,
) -> Result<CvOutcome> {
    if data.n() < 3 {
        return Err(Error::param("cross-validation needs at least three records"));
    }
    if queries.n() != data.n() || queries.dim() != data.dim() {
        return Err(Error::param("query points must match the training records one to one"));
    }
    if scales.len() != data.dim() || kernel.dim != data.dim() {
        return Err(Error::param("kernel or Laplace scales do not match the input dimension"));
    }
    if cfg.loss == Loss::NegLogLikelihood && !data.is_binary() {
        return Err(Error::param("log-likelihood loss requires binary responses"));
    }
    let (folds, subsampled) = fold_indices(data.n(), cfg.subsample, cfg.subsample_seed);
    let tally = if data.dim() == 1 {
        cv_tally_1d(data, queries.records(), kernel.family, scales[0], &cfg.grid, cfg.loss, &folds)
    } else {
        cv_tally_generic(data, queries, kernel, scales, &cfg.grid, cfg.loss, &folds)?
    };
    let scores: Vec<CvScore> = cfg
        .grid
        .iter()
        .zip(&tally)
        .map(|(&h, &(total, degenerate, count))| CvScore {
            bandwidth: h,
            score: (degenerate < count && total.is_finite()).then_some(total),
            degenerate_folds: degenerate,
        })
        .collect();
    let (best, _) = pick_min(scores.iter().map(|s| s.score))
        .ok_or_else(|| Error::numerical("every bandwidth candidate produced degenerate leave-one-out predictions"))?;
    let boundary_minimum = cfg.grid.len() > 1 && (best == 0 || best == cfg.grid.len() - 1);
    if boundary_minimum {
        log::warn!("cross-validation minimum at grid edge h = {}; consider widening the grid", cfg.grid[best]);
    }
    Ok(CvOutcome { h_star: cfg.grid[best], scores, folds: folds.len(), subsampled, boundary_minimum })
}

/// Index of the smallest score, preferring later (larger-h) entries on ties.
fn pick_min(scores: impl Iterator<Item = Option<f64>>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.enumerate() {
        if let Some(s) = s {
            if best.map_or(true, |(_, b)| s <= b) {
                best = Some((k, s));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCvScore {
    pub bandwidth: f64,
    pub score: f64,
    /// Standard error of the pair-level noise in `score`. It dominates when
    /// `b / h` is large.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCvOutcome {
    pub h_star: f64,
    pub scores: Vec<DensityCvScore>,
    pub boundary_minimum: bool,
}

/// Number of standard errors added to the criterion before minimizing.
pub const DENSITY_CV_PENALTY: f64 = 2.0;

/// Least-squares cross-validation criterion for the (deconvoluting) density
/// estimate at bandwidth `h`. With `b = 0` it is the classical criterion.
pub fn density_cv_score(data: &Dataset, family: KernelFamily, b: f64, h: f64) -> Result<f64> {
    check_density_input(data)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::param(format!("bandwidth must be positive, got {h}")));
    }
    Ok(density_cv_scores(data.records(), family, b, &[h])[0].score)
}

fn check_density_input(data: &Dataset) -> Result<()> {
    if data.dim() != 1 {
        return Err(Error::param("density cross-validation is implemented for one-dimensional data"));
    }
    if data.n() < 3 {
        return Err(Error::param("density cross-validation needs at least three records"));
    }
    Ok(())
}

/// Beyond this many bandwidths apart Gaussian pair terms are below `1e-17`
/// of their peak.
const GAUSSIAN_REACH: f64 = 14.0;

/// Pair terms `(T(u), B(u))` with `T = (1 - r²D²)² (K*K)` and
/// `B = (1 - r²D²)² K`.
#[inline(always)]
fn density_pair_terms(family: KernelFamily, r2: f64, r4: f64, u: f64) -> (f64, f64) {
    let u2 = u * u;
    match family {
        KernelFamily::Gaussian => {
            // K*K is the normal density with variance 2
            let e4 = (-0.25 * u2).exp();
            let phi_u = FRAC_1_SQRT_2PI * e4 * e4;
            let v2 = 0.5 * u2;
            let t = FRAC_1_SQRT_2PI * std::f64::consts::FRAC_1_SQRT_2
                * e4
                * (1.0 - r2 * (v2 - 1.0) + 0.25 * r4 * (v2 * v2 - 6.0 * v2 + 3.0));
            let b = phi_u * (1.0 - 2.0 * r2 * (u2 - 1.0) + r4 * (u2 * u2 - 6.0 * u2 + 3.0));
            (t, b)
        }
        KernelFamily::Cauchy => {
            // K*K is the Cauchy density with scale 2
            let inv = 1.0 / (1.0 + u2);
            let inv2 = inv * inv;
            let b = FRAC_1_PI * inv * (1.0 - 2.0 * r2 * (6.0 * u2 - 2.0) * inv2
                + r4 * 24.0 * (5.0 * u2 * u2 - 10.0 * u2 + 1.0) * inv2 * inv2);
            let v2 = 0.25 * u2;
            let iv = 1.0 / (1.0 + v2);
            let iv2 = iv * iv;
            let t = 0.5 * FRAC_1_PI * iv * (1.0 - 0.5 * r2 * (6.0 * v2 - 2.0) * iv2
                + r4 * 1.5 * (5.0 * v2 * v2 - 10.0 * v2 + 1.0) * iv2 * iv2);
            (t, b)
        }
    }
}

/// Criterion `(n T(0) + Σ_{i≠j} T_ij) / (n² h) - 2 Σ_{i≠j} B_ij / (n (n-1) h)`
/// with the spread of its pair terms.
fn density_cv_scores(zs: &[f64], family: KernelFamily, b: f64, grid: &[f64]) -> Vec<DensityCvScore> {
    let mut sorted = zs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let zs = &sorted[..];
    let n = zs.len();
    let nf = n as f64;
    let params: Vec<(f64, f64, f64, f64, f64)> = grid
        .iter()
        .map(|&h| {
            let r2 = (b / h) * (b / h);
            let c_t = 1.0 / (nf * nf * h);
            let c_b = 2.0 / (nf * (nf - 1.0) * h);
            (h, r2, r2 * r2, c_t, c_b)
        })
        .collect();
    // per record and candidate: Σ_{j>i} T_ij, Σ_{j>i} B_ij, Σ_{j>i} w_ij²
    let rows: Vec<Vec<[f64; 3]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let zi = zs[i];
            params
                .iter()
                .map(|&(h, r2, r4, c_t, c_b)| {
                    let hi = match family {
                        KernelFamily::Gaussian => zs.partition_point(|&z| z <= zi + GAUSSIAN_REACH * h),
                        KernelFamily::Cauchy => n,
                    };
                    let inv_h = 1.0 / h;
                    let mut acc = [0.0; 3];
                    for &zj in &zs[(i + 1).min(hi)..hi] {
                        let (t, bb) = density_pair_terms(family, r2, r4, (zi - zj) * inv_h);
                        let w = c_t * t - c_b * bb;
                        acc[0] += t;
                        acc[1] += bb;
                        acc[2] += w * w;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    params
        .iter()
        .enumerate()
        .map(|(k, &(h, r2, r4, c_t, c_b))| {
            let (mut t_sum, mut b_sum, mut w2_sum) = (0.0, 0.0, 0.0);
            for row in &rows {
                t_sum += row[k][0];
                b_sum += row[k][1];
                w2_sum += row[k][2];
            }
            let t0 = density_pair_terms(family, r2, r4, 0.0).0;
            let score = c_t * (nf * t0 + 2.0 * t_sum) - 2.0 * c_b * b_sum;
            // pair-level part of Var Σ_{i<j} a_ij with a_ij = 2 w_ij
            let pairs = nf * (nf - 1.0) / 2.0;
            let mean_a = 2.0 * (c_t * t_sum - c_b * b_sum) / pairs;
            let var = (4.0 * w2_sum - pairs * mean_a * mean_a).max(0.0);
            DensityCvScore { bandwidth: h, score, std_error: var.sqrt() }
        })
        .collect()
}

/// Minimizes `criterion + 2 · std_error` over `grid`; ties go to the larger
/// bandwidth. The penalty keeps small bandwidths, whose criterion is
/// dominated by pair noise under strong deconvolution, from winning.
pub fn density_cv_select(data: &Dataset, family: KernelFamily, b: f64, grid: &[f64]) -> Result<DensityCvOutcome> {
    check_density_input(data)?;
    CvConfig::new(grid.to_vec(), Loss::SquaredError)?;
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::param(format!("Laplace scale must be non-negative, got {b}")));
    }
    let scores = density_cv_scores(data.records(), family, b, grid);
    let (best, _) = pick_min(scores.iter().map(|s| {
        let v = s.score + DENSITY_CV_PENALTY * s.std_error;
        v.is_finite().then_some(v)
    }))
    .ok_or_else(|| Error::numerical("density cross-validation produced no finite score"))?;
    let boundary_minimum = grid.len() > 1 && (best == 0 || best == grid.len() - 1);
    if boundary_minimum {
        log::warn!("density cross-validation minimum at grid edge h = {}", grid[best]);
    }
    Ok(DensityCvOutcome { h_star: grid[best], scores, boundary_minimum })
}
