//! Linear and logistic regression baselines fit directly on (possibly
//! privatized) inputs, without any noise correction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::Dataset;
use crate::regression::{mean_log_likelihood, mean_squared_error, FitMetrics, LabeledDataset};

/// Newton iterations stop once any coefficient exceeds this magnitude.
pub const COEFFICIENT_BOUND: f64 = 30.0;

fn design(inputs: &Dataset) -> DMatrix<f64> {
    let q = inputs.dim();
    DMatrix::from_fn(inputs.n(), q + 1, |i, j| if j == 0 { 1.0 } else { inputs.row(i)[j - 1] })
}

fn linear_predictor(coefficients: &[f64], x: &[f64]) -> f64 {
    coefficients[0] + coefficients[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

fn column_label(inputs: &Dataset, j: usize) -> String {
    if j == 0 {
        "intercept".to_string()
    } else {
        inputs.column_names()[j - 1].clone()
    }
}

/// Ordinary least squares; coefficients are intercept first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        linear_predictor(&self.coefficients, x)
    }
}

/// Least squares through a Householder QR factorization of the design.
pub fn ols_fit(data: &LabeledDataset) -> Result<LinearModel> {
    let inputs = data.inputs();
    let p = inputs.dim() + 1;
    if data.n() < p {
        return Err(Error::param(format!("least squares needs at least {p} records, got {}", data.n())));
    }
    let x = design(inputs);
    let y = DVector::from_column_slice(data.responses());
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..p).map(|j| x.column(j).norm()).fold(0.0, f64::max);
    for j in 0..p {
        if r[(j, j)].abs() <= 1e-10 * scale.max(1.0) {
            return Err(Error::numerical(format!(
                "design matrix is rank deficient at column `{}`",
                column_label(inputs, j)
            )));
        }
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::numerical("triangular solve failed"))?;
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::numerical("least squares produced non-finite coefficients"));
    }
    Ok(LinearModel { coefficients })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Labels are (quasi-)separable; the likelihood has no finite maximizer.
    pub separation: bool,
    /// Mean log-likelihood after each accepted step, starting from zero coefficients.
    pub log_likelihood_trace: Vec<f64>,
}

impl LogisticModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(linear_predictor(&self.coefficients, x))
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Stable `y ln σ(η) + (1 - y) ln(1 - σ(η))`.
fn log_lik_term(y: f64, eta: f64) -> f64 {
    // ln σ(η) = -ln(1 + e^{-η})
    let log1pexp = |t: f64| if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
    -(y * log1pexp(-eta) + (1.0 - y) * log1pexp(eta))
}

fn mean_log_lik(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter().zip(y).map(|(&e, &y)| log_lik_term(y, e)).sum::<f64>() / y.len() as f64
}

/// Maximum likelihood by damped Newton iteration. The step is halved until
/// the log-likelihood does not decrease. Converged when the max-norm of the
/// gradient of the mean log-likelihood is at most `tol`.
pub fn logistic_fit(data: &LabeledDataset, max_iter: usize, tol: f64) -> Result<LogisticModel> {
    let inputs = data.inputs();
    if let Some(i) = data.responses().iter().position(|y| *y != 0.0 && *y != 1.0) {
        return Err(Error::param(format!("logistic regression needs 0/1 responses; record {i} is {}", data.responses()[i])));
    }
    let p = inputs.dim() + 1;
    if data.n() < p {
        return Err(Error::param(format!("logistic regression needs at least {p} records")));
    }
    let x = design(inputs);
    let y = data.responses();
    let n = y.len() as f64;
    let mut beta = DVector::zeros(p);
    let mut ll = mean_log_lik(&x, y, &beta);
    let mut trace = vec![ll];
    let mut converged = false;
    let mut separation = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let eta = &x * &beta;
        let probs: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let resid = DVector::from_iterator(y.len(), y.iter().zip(&probs).map(|(y, p)| y - p));
        let grad = x.transpose() * resid / n;
        if grad.amax() <= tol {
            converged = true;
            break;
        }
        let mut weighted = x.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= probs[i] * (1.0 - probs[i]);
        }
        let mut hess = x.transpose() * weighted / n;
        let step = loop {
            if let Some(ch) = hess.clone().cholesky() {
                break ch.solve(&grad);
            }
            let ridge = 1e-12 * (1.0 + hess.diagonal().amax());
            for j in 0..p {
                hess[(j, j)] += ridge.max(1e-300);
            }
        };
        let mut t = 1.0;
        let accepted = loop {
            let cand = &beta + &step * t;
            let cand_ll = mean_log_lik(&x, y, &cand);
            if cand_ll >= ll {
                break Some((cand, cand_ll));
            }
            t *= 0.5;
            if t < 1e-12 {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((cand, cand_ll)) => {
                beta = cand;
                ll = cand_ll;
                trace.push(ll);
            }
            None => break,
        }
        if beta.amax() > COEFFICIENT_BOUND {
            separation = true;
            break;
        }
    }
    if !separation {
        // perfectly fitted labels mean the supremum is not attained
        let eta = &x * &beta;
        separation = eta.iter().zip(y).all(|(&e, &y)| (sigmoid(e) - y).abs() < 1e-6);
    }
    if separation {
        log::warn!("logistic regression: labels are separable, coefficients stopped at {:?}", beta.as_slice());
    } else if !converged {
        log::warn!("logistic regression: no convergence after {iterations} iterations");
    }
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    if coefficients.iter().any(|c| !c.is_finite()) {
        return Err(Error::numerical("logistic regression produced non-finite coefficients"));
    }
    Ok(LogisticModel { coefficients, converged, iterations, separation, log_likelihood_trace: trace })
}

pub enum Baseline<'a> {
    Linear(&'a LinearModel),
    Logistic(&'a LogisticModel),
}

/// Same metric definitions as the kernel model: MSE always, mean
/// log-likelihood for the logistic model.
pub fn baseline_metrics(model: Baseline<'_>, eval: &LabeledDataset) -> Result<FitMetrics> {
    let preds: Vec<f64> = eval
        .inputs()
        .rows()
        .map(|x| match &model {
            Baseline::Linear(m) => m.predict(x),
            Baseline::Logistic(m) => m.predict(x),
        })
        .collect();
    let mse = mean_squared_error(&preds, eval.responses())?;
    let log_likelihood = match model {
        Baseline::Logistic(_) => Some(mean_log_likelihood(&preds, eval.responses())?),
        Baseline::Linear(_) => None,
    };
    Ok(FitMetrics { n: eval.n(), mse, log_likelihood, degenerate_predictions: 0, extrapolated_predictions: 0 })
}
