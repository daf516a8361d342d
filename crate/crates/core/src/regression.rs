//! Nadaraya-Watson regression with the deconvolution-adjusted kernel.
//!
//! The weights `K̂((x - z_i) / h)` can be negative, so predictions are not
//! confined to the range of the responses. A denominator below `1e-12` in
//! magnitude is treated as degenerate and answered with the response of the
//! nearest training input.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accumulate;
use crate::error::{Error, Result};
use crate::kernels::{AdjustedKernel, Kernel};
use crate::privacy::Dataset;

/// Below this the weight sum is considered degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;
/// Queries whose weight sum is below `EXTRAPOLATION_FACTOR · n` are flagged.
pub const EXTRAPOLATION_FACTOR: f64 = 1e-8;
/// Probabilities are kept inside `[PROB_CLIP, 1 - PROB_CLIP]` in binary mode.
pub const PROB_CLIP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    inputs: Dataset,
    responses: Vec<f64>,
    binary: bool,
}

impl LabeledDataset {
    pub fn new(inputs: Dataset, responses: Vec<f64>) -> Result<Self> {
        if inputs.n() != responses.len() {
            return Err(Error::param(format!(
                "{} inputs but {} responses",
                inputs.n(),
                responses.len()
            )));
        }
        if let Some(i) = responses.iter().position(|y| !y.is_finite()) {
            return Err(Error::data(format!("response {i} is not finite")));
        }
        Ok(LabeledDataset { inputs, responses, binary: false })
    }

    /// Dataset whose responses must all be 0 or 1.
    pub fn binary(inputs: Dataset, responses: Vec<f64>) -> Result<Self> {
        if let Some(i) = responses.iter().position(|y| *y != 0.0 && *y != 1.0) {
            return Err(Error::param(format!(
                "binary response {i} is {}, expected 0 or 1",
                responses[i]
            )));
        }
        let mut out = Self::new(inputs, responses)?;
        out.binary = true;
        Ok(out)
    }

    pub fn inputs(&self) -> &Dataset {
        &self.inputs
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn dim(&self) -> usize {
        self.inputs.dim()
    }

    pub fn is_binary(&self) -> bool {
        self.binary
    }

    pub fn is_privatized(&self) -> bool {
        self.inputs.is_privatized()
    }

    /// Same responses paired with different inputs (e.g. their privatized copy).
    pub fn with_inputs(&self, inputs: Dataset) -> Result<Self> {
        let mut out = Self::new(inputs, self.responses.clone())?;
        out.binary = self.binary;
        Ok(out)
    }

    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let inputs = self.inputs.select(indices)?;
        let responses = indices.iter().map(|&i| self.responses[i]).collect();
        let mut out = Self::new(inputs, responses)?;
        out.binary = self.binary;
        Ok(out)
    }

    /// Copy with record `j` removed.
    pub fn without(&self, j: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.n()).filter(|&i| i != j).collect();
        self.select(&keep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Continuous,
    Binary,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Mode::Continuous),
            "binary" => Ok(Mode::Binary),
            other => Err(Error::param(format!("unknown regression mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    /// Weight sum was degenerate; `value` is a nearest-neighbour response.
    pub degenerate: bool,
    /// Weight sum was small relative to `n`; the query is far from the data.
    pub extrapolated: bool,
}

/// Batch predictions with warning counters.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub values: Vec<f64>,
    pub degenerate: usize,
    pub extrapolated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub n: usize,
    pub mse: f64,
    pub log_likelihood: Option<f64>,
    pub degenerate_predictions: usize,
    pub extrapolated_predictions: usize,
}

#[derive(Debug, Clone)]
pub struct RegressionModel {
    data: LabeledDataset,
    kernel: AdjustedKernel,
    bandwidth: f64,
    scales: Vec<f64>,
    mode: Mode,
}

impl RegressionModel {
    pub fn new(data: LabeledDataset, kernel: Kernel, bandwidth: f64, scales: &[f64], mode: Mode) -> Result<Self> {
        if scales.len() != data.dim() {
            return Err(Error::param(format!(
                "{} Laplace scales given for {}-dimensional inputs",
                scales.len(),
                data.dim()
            )));
        }
        if kernel.dim != data.dim() {
            return Err(Error::param("kernel dimension does not match the inputs"));
        }
        if mode == Mode::Binary && !data.is_binary() {
            return Err(Error::param("binary mode requires a binary dataset"));
        }
        let adjusted = AdjustedKernel::for_bandwidth(kernel, scales, bandwidth)?;
        Ok(RegressionModel { data, kernel: adjusted, bandwidth, scales: scales.to_vec(), mode })
    }

    pub fn data(&self) -> &LabeledDataset {
        &self.data
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn kernel(&self) -> &Kernel {
        self.kernel.base()
    }

    /// Weight sums over training records, skipping `skip`.
    fn sums(&self, x: &[f64], skip: Option<usize>) -> (f64, f64) {
        let inputs = self.data.inputs.records();
        let ys = &self.data.responses;
        let inv_h = 1.0 / self.bandwidth;
        if self.data.dim() == 1 {
            let family = self.kernel.base().family;
            let r = self.kernel.ratios()[0];
            let r2 = r * r;
            return match skip {
                None => accumulate::weighted_sums_1d(inputs, ys, x[0], inv_h, family, r2),
                Some(j) => {
                    let (d1, s1) = accumulate::weighted_sums_1d(&inputs[..j], &ys[..j], x[0], inv_h, family, r2);
                    let (d2, s2) =
                        accumulate::weighted_sums_1d(&inputs[j + 1..], &ys[j + 1..], x[0], inv_h, family, r2);
                    (d1 + d2, s1 + s2)
                }
            };
        }
        let mut u = vec![0.0; x.len()];
        let (mut den, mut num) = (0.0, 0.0);
        for (i, z) in self.data.inputs.rows().enumerate() {
            if Some(i) == skip {
                continue;
            }
            for (k, v) in u.iter_mut().enumerate() {
                *v = (x[k] - z[k]) * inv_h;
            }
            let w = self.kernel.value(&u);
            den += w;
            num += w * ys[i];
        }
        (den, num)
    }

    fn nearest_response(&self, x: &[f64], skip: Option<usize>) -> f64 {
        let mut best = (f64::INFINITY, f64::NAN);
        for (i, z) in self.data.inputs.rows().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let d: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, self.data.responses[i]);
            }
        }
        best.1
    }

    fn finish(&self, x: &[f64], skip: Option<usize>, den: f64, num: f64, used: usize) -> Prediction {
        let degenerate = !(den.abs() >= DEGENERATE_DENOMINATOR);
        let extrapolated = !(den.abs() >= EXTRAPOLATION_FACTOR * used as f64);
        let raw = if degenerate { self.nearest_response(x, skip) } else { num / den };
        let value = match self.mode {
            Mode::Continuous => raw,
            Mode::Binary => raw.clamp(PROB_CLIP, 1.0 - PROB_CLIP),
        };
        Prediction { value, degenerate, extrapolated }
    }

    /// Nadaraya-Watson prediction at `x`.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_query(x)?;
        let (den, num) = self.sums(x, None);
        Ok(self.finish(x, None, den, num, self.data.n()))
    }

    /// Prediction from all training records except `j`.
    pub fn predict_loo(&self, j: usize, x: &[f64]) -> Result<Prediction> {
        self.check_query(x)?;
        if self.data.n() < 2 {
            return Err(Error::param("leave-one-out prediction needs at least two records"));
        }
        if j >= self.data.n() {
            return Err(Error::param(format!("held-out index {j} out of range")));
        }
        let (den, num) = self.sums(x, Some(j));
        Ok(self.finish(x, Some(j), den, num, self.data.n() - 1))
    }

    fn check_query(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.data.dim() {
            return Err(Error::param(format!(
                "query has {} coordinates, model expects {}",
                x.len(),
                self.data.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("query is not finite"));
        }
        Ok(())
    }

    /// Predictions at every row of `queries`. Repeated rows are computed once.
    pub fn predict_many(&self, queries: &Dataset) -> Result<Predictions> {
        let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut unique: Vec<&[f64]> = Vec::new();
        let mut index = Vec::with_capacity(queries.n());
        for row in queries.rows() {
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            let next = unique.len();
            let k = *slot.entry(key).or_insert_with(|| {
                unique.push(row);
                next
            });
            index.push(k);
        }
        let preds: Vec<Prediction> = unique.par_iter().map(|x| self.predict(x)).collect::<Result<_>>()?;
        let values = index.iter().map(|&k| preds[k].value).collect();
        let degenerate = index.iter().filter(|&&k| preds[k].degenerate).count();
        let extrapolated = index.iter().filter(|&&k| preds[k].extrapolated).count();
        Ok(Predictions { values, degenerate, extrapolated })
    }

    /// Mean squared error and, in binary mode, mean log-likelihood on `eval`.
    pub fn fit_metrics(&self, eval: &LabeledDataset) -> Result<FitMetrics> {
        let preds = self.predict_many(eval.inputs())?;
        let mse = mean_squared_error(&preds.values, eval.responses())?;
        let log_likelihood = match self.mode {
            Mode::Binary => Some(mean_log_likelihood(&preds.values, eval.responses())?),
            Mode::Continuous => None,
        };
        Ok(FitMetrics {
            n: eval.n(),
            mse,
            log_likelihood,
            degenerate_predictions: preds.degenerate,
            extrapolated_predictions: preds.extrapolated,
        })
    }
}

pub fn mean_squared_error(predictions: &[f64], responses: &[f64]) -> Result<f64> {
    if predictions.len() != responses.len() || predictions.is_empty() {
        return Err(Error::param("prediction and response lengths differ or are empty"));
    }
    Ok(predictions.iter().zip(responses).map(|(p, y)| (y - p) * (y - p)).sum::<f64>() / responses.len() as f64)
}

/// Mean Bernoulli log-likelihood; probabilities are clipped to
/// `[PROB_CLIP, 1 - PROB_CLIP]`.
pub fn mean_log_likelihood(probs: &[f64], responses: &[f64]) -> Result<f64> {
    if probs.len() != responses.len() || probs.is_empty() {
        return Err(Error::param("probability and response lengths differ or are empty"));
    }
    let total: f64 = probs
        .iter()
        .zip(responses)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            y * p.ln() + (1.0 - y) * (1.0 - p).ln()
        })
        .sum();
    Ok(total / responses.len() as f64)
}
