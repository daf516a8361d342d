//! Privacy-budget sweeps: for each (ε, seed) cell the inputs are
//! privatized, the bandwidth is chosen by cross-validation on the noisy
//! pairs, the kernel model and the baselines are fit on the same pairs, and
//! all models are scored on the raw pairs.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{self, CvConfig, Loss, LOO_FOLD_CAP};
use crate::baselines::{self, Baseline};
use crate::error::{Error, Result};
use crate::io::{self, fmt_f64};
use crate::kernels::{Kernel, KernelFamily};
use crate::privacy::{self, SupportBox};
use crate::regression::{FitMetrics, LabeledDataset, Mode, RegressionModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Kernel,
    Linear,
    Logistic,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Kernel => "kernel",
            Estimator::Linear => "linear",
            Estimator::Logistic => "logistic",
        }
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(Estimator::Kernel),
            "linear" => Ok(Estimator::Linear),
            "logistic" => Ok(Estimator::Logistic),
            other => Err(Error::param(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mse,
    LogLikelihood,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::LogLikelihood => "log_likelihood",
        }
    }

    fn value(self, m: &FitMetrics) -> f64 {
        match self {
            Metric::Mse => m.mse,
            Metric::LogLikelihood => m.log_likelihood.unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub estimators: Vec<Estimator>,
    pub metrics: Vec<Metric>,
}

impl SweepSpec {
    pub fn new(epsilons: Vec<f64>, seeds: Vec<u64>, estimators: Vec<Estimator>, metrics: Vec<Metric>) -> Result<Self> {
        if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::param("sweep needs at least one positive ε"));
        }
        if seeds.is_empty() {
            return Err(Error::param("sweep needs at least one seed"));
        }
        if estimators.is_empty() || metrics.is_empty() {
            return Err(Error::param("sweep needs at least one estimator and one metric"));
        }
        Ok(SweepSpec { epsilons, seeds, estimators, metrics })
    }

    /// `count` consecutive seeds starting at `base`.
    pub fn seeds_from(base: u64, count: usize) -> Vec<u64> {
        (0..count as u64).map(|k| base.wrapping_add(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kernel: KernelFamily,
    pub support: SupportBox,
    pub mode: Mode,
    pub cv_subsample: Option<usize>,
    /// Fixed bandwidth; `None` selects by cross-validation.
    pub bandwidth: Option<f64>,
}

impl SweepConfig {
    pub fn new(kernel: KernelFamily, support: SupportBox, mode: Mode) -> Self {
        SweepConfig { kernel, support, mode, cv_subsample: Some(LOO_FOLD_CAP), bandwidth: None }
    }
}

/// One model fit. `epsilon` and `seed` are `None` on noiseless reference rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub estimator: Estimator,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub bandwidth: Option<f64>,
    pub metrics: Option<FitMetrics>,
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn value(&self, metric: Metric) -> f64 {
        self.metrics.as_ref().map_or(f64::NAN, |m| metric.value(m))
    }

    pub fn is_reference(&self) -> bool {
        self.epsilon.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    pub spec: SweepSpec,
    pub kernel: KernelFamily,
    pub rows: Vec<SweepRow>,
}

fn fit_cell(
    data: &LabeledDataset,
    train: &LabeledDataset,
    scales: &[f64],
    estimator: Estimator,
    config: &SweepConfig,
    seed: u64,
) -> Result<(Option<f64>, FitMetrics)> {
    match estimator {
        Estimator::Kernel => {
            let kernel = Kernel::new(config.kernel, data.dim())?;
            let h = match config.bandwidth {
                Some(h) => h,
                None => {
                    let grid = bandwidth::default_grid(train.inputs(), scales)?;
                    let cfg = CvConfig::new(grid, Loss::for_mode(config.mode))?.with_subsample(config.cv_subsample, seed);
                    bandwidth::cv_select_at(train, data.inputs(), &kernel, scales, &cfg)?.h_star
                }
            };
            let model = RegressionModel::new(train.clone(), kernel, h, scales, config.mode)?;
            Ok((Some(h), model.fit_metrics(data)?))
        }
        Estimator::Linear => {
            let m = baselines::ols_fit(train)?;
            Ok((None, baselines::baseline_metrics(Baseline::Linear(&m), data)?))
        }
        Estimator::Logistic => {
            let m = baselines::logistic_fit(train, 100, 1e-8)?;
            Ok((None, baselines::baseline_metrics(Baseline::Logistic(&m), data)?))
        }
    }
}

fn cell_rows(
    data: &LabeledDataset,
    epsilon: Option<f64>,
    seed: Option<u64>,
    estimators: &[Estimator],
    config: &SweepConfig,
) -> Vec<SweepRow> {
    let prepared = (|| -> Result<(LabeledDataset, Vec<f64>)> {
        match (epsilon, seed) {
            (Some(eps), Some(seed)) => {
                let params = privacy::laplace_scales(&config.support, eps)?;
                let z = privacy::privatize(data.inputs(), &params, seed)?;
                Ok((data.with_inputs(z)?, params.scales().to_vec()))
            }
            _ => Ok((data.clone(), vec![0.0; data.dim()])),
        }
    })();
    estimators
        .iter()
        .map(|&estimator| {
            let outcome = prepared
                .as_ref()
                .map_err(|e| Error::numerical(e.to_string()))
                .and_then(|(train, scales)| fit_cell(data, train, scales, estimator, config, seed.unwrap_or(0)));
            match outcome {
                Ok((bandwidth, metrics)) => {
                    SweepRow { estimator, epsilon, seed, bandwidth, metrics: Some(metrics), failure: None }
                }
                Err(e) => {
                    log::warn!("sweep cell {} ε={epsilon:?} seed={seed:?} failed: {e}", estimator.name());
                    SweepRow { estimator, epsilon, seed, bandwidth: None, metrics: None, failure: Some(e.to_string()) }
                }
            }
        })
        .collect()
}

/// Runs every (ε, seed) cell plus one noiseless reference cell. Failed fits
/// become rows with a failure message. Rows are sorted by ε (references
/// first), seed and estimator.
pub fn run_sweep(spec: &SweepSpec, data: &LabeledDataset, config: &SweepConfig) -> Result<SweepResults> {
    if config.support.dim() != data.dim() {
        return Err(Error::param("support dimension does not match the inputs"));
    }
    if spec.estimators.contains(&Estimator::Logistic) && !data.is_binary() {
        return Err(Error::param("the logistic baseline needs binary responses"));
    }
    if config.mode == Mode::Binary && !data.is_binary() {
        return Err(Error::param("binary mode needs binary responses"));
    }
    data.inputs().check_support(&config.support)?;
    let mut estimators = spec.estimators.clone();
    estimators.sort();
    estimators.dedup();
    let mut cells: Vec<(Option<f64>, Option<u64>)> = vec![(None, None)];
    for &eps in &spec.epsilons {
        for &seed in &spec.seeds {
            cells.push((Some(eps), Some(seed)));
        }
    }
    let mut rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(eps, seed)| cell_rows(data, eps, seed, &estimators, config))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &SweepRow| r.epsilon.unwrap_or(f64::NEG_INFINITY);
        key(a).total_cmp(&key(b)).then(a.seed.cmp(&b.seed)).then(a.estimator.cmp(&b.estimator))
    });
    Ok(SweepResults { spec: spec.clone(), kernel: config.kernel, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub seeds: Vec<u64>,
    pub epsilons: Vec<f64>,
    pub kernel: KernelFamily,
    pub estimators: Vec<Estimator>,
    pub metrics: Vec<Metric>,
    pub bandwidths: Vec<ManifestBandwidth>,
    pub failures: Vec<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestBandwidth {
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    pub bandwidth: f64,
}

pub const TIDY_HEADER: [&str; 5] = ["estimator", "epsilon", "seed", "metric", "value"];

/// Writes `sweep.csv` (one observation per row), `manifest.json` and, when
/// asked, a gnuplot script `sweep.gp`. Reference rows carry ε `inf` and an
/// empty seed. Returns the written paths.
pub fn emit_plotdata(results: &SweepResults, out_dir: &Path, seed: Option<u64>, gnuplot: bool) -> Result<Vec<PathBuf>> {
    if results.rows.is_empty() {
        return Err(Error::param("no sweep results to write"));
    }
    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(TIDY_HEADER)?;
    for row in &results.rows {
        for &metric in &results.spec.metrics {
            w.write_record([
                row.estimator.name().to_string(),
                row.epsilon.map_or("inf".to_string(), fmt_f64),
                row.seed.map_or(String::new(), |s| s.to_string()),
                metric.name().to_string(),
                fmt_f64(row.value(metric)),
            ])?;
        }
    }
    w.flush()?;
    let mut files = vec![csv_path];
    if gnuplot {
        let gp = out_dir.join("sweep.gp");
        let mut script = String::from(
            "set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset xlabel 'epsilon'\n",
        );
        for metric in &results.spec.metrics {
            script.push_str(&format!("set ylabel '{0}'\nset output '{0}.png'\nplot", metric.name()));
            let parts: Vec<String> = results
                .spec
                .estimators
                .iter()
                .map(|e| {
                    format!(
                        " 'sweep.csv' using ($4 eq '{m}' && strcol(1) eq '{e}' && $2 < 1e300 ? $2 : 1/0):5 with points title '{e}'",
                        m = metric.name(),
                        e = e.name()
                    )
                })
                .collect();
            script.push_str(&parts.join(","));
            script.push('\n');
        }
        std::fs::write(&gp, script)?;
        files.push(gp);
    }
    let manifest_path = out_dir.join("manifest.json");
    files.push(manifest_path.clone());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        seeds: results.spec.seeds.clone(),
        epsilons: results.spec.epsilons.clone(),
        kernel: results.kernel,
        estimators: results.spec.estimators.clone(),
        metrics: results.spec.metrics.clone(),
        bandwidths: results
            .rows
            .iter()
            .filter_map(|r| r.bandwidth.map(|h| ManifestBandwidth { epsilon: r.epsilon, seed: r.seed, bandwidth: h }))
            .collect(),
        failures: results
            .rows
            .iter()
            .filter_map(|r| {
                r.failure.as_ref().map(|f| format!("{} eps={:?} seed={:?}: {f}", r.estimator.name(), r.epsilon, r.seed))
            })
            .collect(),
        files: files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
    };
    io::write_json(&manifest_path, &manifest)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthdata::{make_regression_dataset, Curve, InputLaw, SyntheticSpec};

    fn synthetic(n: usize) -> LabeledDataset {
        make_regression_dataset(&SyntheticSpec::new(InputLaw::mixture(), Curve::G2, n, 3)).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SweepSpec::new(vec![0.0], vec![1], vec![Estimator::Kernel], vec![Metric::Mse]).is_err());
        assert!(SweepSpec::new(vec![1.0], vec![], vec![Estimator::Kernel], vec![Metric::Mse]).is_err());
        assert_eq!(SweepSpec::seeds_from(5, 3), vec![5, 6, 7]);
    }

    #[test]
    fn row_count_and_order() {
        let data = synthetic(150);
        let spec = SweepSpec::new(vec![5.0, 1.0], vec![2, 1], vec![Estimator::Linear, Estimator::Kernel], vec![Metric::Mse])
            .unwrap();
        let cfg = SweepConfig::new(KernelFamily::Gaussian, InputLaw::mixture().support(), Mode::Continuous);
        let res = run_sweep(&spec, &data, &cfg).unwrap();
        assert_eq!(res.rows.len(), 2 * 2 * 2 + 2);
        assert!(res.rows[0].is_reference() && res.rows[1].is_reference());
        assert_eq!(res.rows[2].epsilon, Some(1.0));
        assert_eq!(res.rows[2].seed, Some(1));
        assert_eq!(res.rows[2].estimator, Estimator::Kernel);
        assert!(res.rows.iter().all(|r| r.failure.is_none()));
    }

    #[test]
    fn huge_epsilon_matches_reference() {
        let data = synthetic(200);
        let spec = SweepSpec::new(vec![1e15], vec![9], vec![Estimator::Kernel], vec![Metric::Mse]).unwrap();
        let cfg = SweepConfig::new(KernelFamily::Gaussian, InputLaw::mixture().support(), Mode::Continuous);
        let res = run_sweep(&spec, &data, &cfg).unwrap();
        let (a, b) = (res.rows[0].value(Metric::Mse), res.rows[1].value(Metric::Mse));
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn failures_are_rows() {
        let data = synthetic(50);
        let spec = SweepSpec::new(vec![1.0], vec![0], vec![Estimator::Kernel], vec![Metric::Mse]).unwrap();
        let mut cfg = SweepConfig::new(KernelFamily::Gaussian, InputLaw::mixture().support(), Mode::Continuous);
        cfg.bandwidth = Some(-1.0);
        let res = run_sweep(&spec, &data, &cfg).unwrap();
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows.iter().all(|r| r.failure.is_some() && r.value(Metric::Mse).is_nan()));
    }
}
