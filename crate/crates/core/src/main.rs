use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use deconv_ldp::bandwidth::{self, CvConfig, Loss};
use deconv_ldp::baselines::{self, Baseline};
use deconv_ldp::density::{self, EstimateGrid, EstimatorTag};
use deconv_ldp::io::{self, ColumnSpec, IngestSpec, Ingested, ResponseKind, ResponseSpec};
use deconv_ldp::regression::FitMetrics;
use deconv_ldp::sweep::{self, Estimator, Metric, SweepConfig, SweepSpec};
use deconv_ldp::synthdata::{self, Curve, InputLaw, SyntheticSpec};
use deconv_ldp::{
    laplace_scales, privatize, Dataset, Error, Kernel, KernelFamily, LabeledDataset, Mode, RegressionModel, Result,
    SupportBox,
};

#[derive(Parser)]
#[command(name = "deconv-ldp", version, about = "Density estimation and kernel regression on Laplace-privatized data")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for privatization noise, synthetic data and fold subsampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value = "gaussian")]
    kernel: KernelFamily,
    /// Privacy budget.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// A positive bandwidth or `cv`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    bandwidth: Option<String>,
    /// Support box `lo:hi[,lo:hi...]`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    support: Option<String>,
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Clip values outside the support instead of failing.
    #[arg(long, global = true)]
    clamp: bool,
    /// Clip negative density values to zero and renormalize.
    #[arg(long, global = true)]
    nonneg: bool,
    /// Bandwidth candidates `min:max:count` (log-spaced).
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, global = true, default_value = "continuous")]
    mode: Mode,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Adult,
    LendingClub,
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Input column(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "x")]
    x: Vec<String>,
    /// Response column.
    #[arg(long, default_value = "y")]
    y: String,
    /// Privatize the inputs with `--epsilon` and `--seed` before fitting.
    /// Without it, a given `--epsilon` declares the inputs already private.
    #[arg(long)]
    privatize: bool,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "x")]
    column: Vec<String>,
    /// Evaluation points per dimension.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Privatize the input with `--epsilon` and `--seed` first.
    #[arg(long)]
    privatize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Add Laplace noise to selected columns.
    Privatize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "x")]
        columns: Vec<String>,
    },
    /// Classical kernel density estimate.
    Kde(DensityArgs),
    /// Classical estimate applied to privatized data.
    NaiveKde(DensityArgs),
    /// Deconvoluting estimate for privatized data.
    DeconvKde(DensityArgs),
    /// Fit a regression model and write its curve and metrics.
    Regress {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "kernel")]
        model: Estimator,
        /// Curve points.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Leave-one-out bandwidth scores.
    Cv {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Draw a synthetic dataset.
    Synth {
        #[arg(long, default_value = "mixture")]
        dist: String,
        #[arg(long, default_value = "none")]
        curve: Curve,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
    },
    /// Metrics across privacy budgets and seeds.
    Sweep {
        /// Data file; omitted means a synthetic g2 dataset.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, value_delimiter = ',', default_value = "x")]
        x: Vec<String>,
        #[arg(long, default_value = "y")]
        y: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        epsilons: Vec<f64>,
        /// Privatization seeds per ε, starting at `--seed`.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long, value_delimiter = ',', default_value = "kernel")]
        models: Vec<Estimator>,
        /// Synthetic sample size when no input is given.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Also write a gnuplot script.
        #[arg(long)]
        gnuplot: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    std::fs::create_dir_all(&g.out)?;
    match &cli.command {
        Command::Privatize { input, columns } => cmd_privatize(g, input, columns),
        Command::Kde(a) => cmd_density(g, a, EstimatorTag::Kde),
        Command::NaiveKde(a) => cmd_density(g, a, EstimatorTag::NaiveKde),
        Command::DeconvKde(a) => cmd_density(g, a, EstimatorTag::DeconvKde),
        Command::Regress { data, model, points } => cmd_regress(g, data, *model, *points),
        Command::Cv { data } => cmd_cv(g, data),
        Command::Synth { dist, curve, n, noise_sd } => cmd_synth(g, dist, *curve, *n, *noise_sd),
        Command::Sweep { input, format, x, y, epsilons, seeds, models, n, gnuplot } => {
            cmd_sweep(g, input.as_deref(), *format, x, y, epsilons, *seeds, models, *n, *gnuplot)
        }
    }
}

fn parse_support(text: &str) -> Result<SupportBox> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for part in text.split(',') {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| Error::Parameter(format!("support `{part}` is not of the form lo:hi")))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parameter(format!("bad support bound `{s}`")));
        lower.push(num(lo)?);
        upper.push(num(hi)?);
    }
    SupportBox::new(lower, upper)
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parameter(format!("grid `{text}` is not of the form min:max:count")));
    }
    let min: f64 = parts[0].parse().map_err(|_| Error::Parameter(format!("bad grid minimum `{}`", parts[0])))?;
    let max: f64 = parts[1].parse().map_err(|_| Error::Parameter(format!("bad grid maximum `{}`", parts[1])))?;
    let count: usize = parts[2].parse().map_err(|_| Error::Parameter(format!("bad grid count `{}`", parts[2])))?;
    bandwidth::log_grid(min, max, count)
}

enum BandwidthChoice {
    Fixed(f64),
    Cv,
}

fn bandwidth_choice(g: &Global) -> Result<BandwidthChoice> {
    match g.bandwidth.as_deref() {
        None | Some("cv") => Ok(BandwidthChoice::Cv),
        Some(s) => match s.parse::<f64>() {
            Ok(h) if h > 0.0 && h.is_finite() => Ok(BandwidthChoice::Fixed(h)),
            _ => Err(Error::Parameter(format!("bandwidth must be a positive number or `cv`, got `{s}`"))),
        },
    }
}

fn require_epsilon(g: &Global) -> Result<f64> {
    g.epsilon.ok_or_else(|| Error::Parameter("--epsilon is required".into()))
}

/// Support from `--support`, else the one recorded at ingestion. Values
/// outside it are clipped with `--clamp` and rejected otherwise.
fn fit_support(g: &Global, data: Dataset, recorded: &SupportBox) -> Result<(Dataset, SupportBox, usize)> {
    let support = match &g.support {
        Some(s) => parse_support(s)?,
        None => recorded.clone(),
    };
    if g.clamp {
        let (clamped, moved) = data.clamp_to(&support)?;
        if moved > 0 {
            log::warn!("clamped {moved} values into the support");
        }
        Ok((clamped, support, moved))
    } else {
        data.check_support(&support)?;
        Ok((data, support, 0))
    }
}

#[derive(Serialize)]
struct PrivatizeMeta<'a> {
    epsilon: f64,
    scales: &'a [f64],
    lower: &'a [f64],
    upper: &'a [f64],
    seed: u64,
    n: usize,
    clamped: usize,
}

fn cmd_privatize(g: &Global, input: &Path, columns: &[String]) -> Result<()> {
    let eps = require_epsilon(g)?;
    let spec = IngestSpec::new(columns.iter().map(ColumnSpec::identity).collect());
    let ing = io::ingest_csv(input, &spec)?;
    let (data, support, clamped) = fit_support(g, ing.inputs, &ing.support)?;
    let params = laplace_scales(&support, eps)?;
    let z = privatize(&data, &params, g.seed)?;
    io::write_dataset(g.out.join("privatized.csv"), &z, None)?;
    io::write_json(
        g.out.join("privatized.json"),
        &PrivatizeMeta {
            epsilon: eps,
            scales: params.scales(),
            lower: support.lower(),
            upper: support.upper(),
            seed: g.seed,
            n: z.n(),
            clamped,
        },
    )
}

#[derive(Serialize)]
struct DensityMeta {
    estimator_tag: EstimatorTag,
    kernel: KernelFamily,
    bandwidth: f64,
    bandwidth_selection: &'static str,
    epsilon: Option<f64>,
    scales: Vec<f64>,
    seed: Option<u64>,
    n: usize,
    points: usize,
    mass: Option<f64>,
    nonneg: bool,
    cv_boundary_minimum: Option<bool>,
}

fn cmd_density(g: &Global, a: &DensityArgs, tag: EstimatorTag) -> Result<()> {
    if a.column.len() > 2 {
        return Err(Error::Parameter("density grids are limited to two dimensions".into()));
    }
    if a.points < 2 {
        return Err(Error::Parameter("at least two evaluation points are required".into()));
    }
    let spec = IngestSpec::new(a.column.iter().map(ColumnSpec::identity).collect());
    let ing = io::ingest_csv(&a.input, &spec)?;
    let q = ing.inputs.dim();
    let privatized_here = a.privatize && tag != EstimatorTag::Kde;
    let (data, support, scales, seed) = if tag == EstimatorTag::Kde {
        let (d, s, _) = fit_support(g, ing.inputs, &ing.support)?;
        (d, s, vec![0.0; q], None)
    } else {
        let eps = require_epsilon(g)?;
        let support = match &g.support {
            Some(s) => parse_support(s)?,
            None => return Err(Error::Parameter("--support is required to derive the noise scale".into())),
        };
        let params = laplace_scales(&support, eps)?;
        let data = if privatized_here {
            let (d, _, _) = fit_support(g, ing.inputs, &support)?;
            privatize(&d, &params, g.seed)?
        } else {
            ing.inputs.mark_privatized(None)
        };
        (data, support, params.scales().to_vec(), privatized_here.then_some(g.seed))
    };
    let kernel = Kernel::new(g.kernel, q)?;
    let est_scales: Vec<f64> = if tag == EstimatorTag::DeconvKde { scales.clone() } else { vec![0.0; q] };
    let (h, how, boundary) = match bandwidth_choice(g)? {
        BandwidthChoice::Fixed(h) => (h, "fixed", None),
        BandwidthChoice::Cv => {
            if q != 1 {
                return Err(Error::Parameter("density cross-validation needs one column; pass --bandwidth".into()));
            }
            let grid = match &g.grid {
                Some(s) => parse_grid(s)?,
                None => bandwidth::default_grid(&data, &est_scales)?,
            };
            let cv = bandwidth::density_cv_select(&data, g.kernel, est_scales[0], &grid)?;
            (cv.h_star, "cv", Some(cv.boundary_minimum))
        }
    };
    let grid = density::default_grid(&support, &scales, h, a.points)?;
    let mut est: EstimateGrid = match tag {
        EstimatorTag::Kde => density::kde(&data, &kernel, h, &grid)?,
        EstimatorTag::NaiveKde => density::naive_kde(&data, &kernel, h, &grid)?,
        EstimatorTag::DeconvKde => density::deconv_kde(&data, &kernel, h, &scales, &grid)?,
    };
    if let Some(eps) = g.epsilon.filter(|_| tag != EstimatorTag::Kde) {
        est = est.with_epsilon(eps);
    }
    est.seed = seed;
    if g.nonneg {
        est = est.clipped_and_renormalized()?;
    }
    let mass = if q == 1 { Some(est.mass()?) } else { None };
    let m = est.len();
    let mut cols: Vec<Vec<f64>> = (0..q).map(|j| (0..m).map(|k| est.point(k)[j]).collect()).collect();
    cols.push(est.values.clone());
    let mut header: Vec<String> = if q == 1 { vec!["x".into()] } else { (1..=q).map(|j| format!("x{j}")).collect() };
    header.push("density".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let col_refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    io::write_columns(g.out.join("density.csv"), &header_refs, &col_refs)?;
    io::write_json(
        g.out.join("density.json"),
        &DensityMeta {
            estimator_tag: tag,
            kernel: g.kernel,
            bandwidth: h,
            bandwidth_selection: how,
            epsilon: est.epsilon,
            scales: est_scales,
            seed: est.seed,
            n: data.n(),
            points: m,
            mass,
            nonneg: g.nonneg,
            cv_boundary_minimum: boundary,
        },
    )
}

struct Prepared {
    /// Pairs the model is trained on (privatized when noise is present).
    train: LabeledDataset,
    /// Pairs the metrics are computed on.
    eval: LabeledDataset,
    scales: Vec<f64>,
    epsilon: Option<f64>,
    support: SupportBox,
    rows_read: usize,
    dropped: usize,
    filtered: usize,
    clamped: usize,
}

fn load_pairs(input: &Path, format: Format, x: &[String], y: &str) -> Result<Ingested> {
    match format {
        Format::Adult => io::prepare_adult(input),
        Format::LendingClub => {
            let out = io::prepare_lending_club(input)?;
            log::info!("lending club: {} rows after the 2010 filter", out.inputs.n());
            Ok(out)
        }
        Format::Csv => io::ingest_csv(
            input,
            &IngestSpec::new(x.iter().map(ColumnSpec::identity).collect())
                .with_response(ResponseSpec { column: y.to_string(), kind: ResponseKind::Numeric }),
        ),
    }
}

fn labeled(inputs: Dataset, responses: Vec<f64>, mode: Mode, format: Format) -> Result<LabeledDataset> {
    if mode == Mode::Binary || matches!(format, Format::Adult) {
        LabeledDataset::binary(inputs, responses)
    } else {
        LabeledDataset::new(inputs, responses)
    }
}

fn effective_mode(g: &Global, format: Format) -> Mode {
    if matches!(format, Format::Adult) {
        Mode::Binary
    } else {
        g.mode
    }
}

fn prepare(g: &Global, a: &DataArgs) -> Result<Prepared> {
    let ing = load_pairs(&a.input, a.format, &a.x, &a.y)?;
    let responses = ing.responses.clone().ok_or_else(|| Error::Parameter("a response column is required".into()))?;
    let mode = effective_mode(g, a.format);
    let (inputs, support, clamped) = if a.privatize || g.epsilon.is_none() {
        fit_support(g, ing.inputs, &ing.support)?
    } else {
        let support = match &g.support {
            Some(s) => parse_support(s)?,
            None => ing.support.clone(),
        };
        (ing.inputs.mark_privatized(None), support, 0)
    };
    let raw = labeled(inputs, responses, mode, a.format)?;
    let (train, scales) = match g.epsilon {
        Some(eps) => {
            let params = laplace_scales(&support, eps)?;
            let train = if a.privatize { raw.with_inputs(privatize(raw.inputs(), &params, g.seed)?)? } else { raw.clone() };
            (train, params.scales().to_vec())
        }
        None => {
            if a.privatize {
                return Err(Error::Parameter("--privatize needs --epsilon".into()));
            }
            (raw.clone(), vec![0.0; raw.dim()])
        }
    };
    Ok(Prepared {
        train,
        eval: raw,
        scales,
        epsilon: g.epsilon,
        support,
        rows_read: ing.rows_read,
        dropped: ing.dropped,
        filtered: ing.filtered,
        clamped,
    })
}

fn cv_config(g: &Global, p: &Prepared, mode: Mode) -> Result<CvConfig> {
    let grid = match &g.grid {
        Some(s) => parse_grid(s)?,
        None => bandwidth::default_grid(p.train.inputs(), &p.scales)?,
    };
    Ok(CvConfig::new(grid, Loss::for_mode(mode))?.with_subsample(Some(bandwidth::LOO_FOLD_CAP), g.seed))
}

#[derive(Serialize)]
struct RegressMeta {
    model: Estimator,
    mode: Mode,
    kernel: Option<KernelFamily>,
    bandwidth: Option<f64>,
    bandwidth_selection: Option<&'static str>,
    epsilon: Option<f64>,
    scales: Vec<f64>,
    seed: u64,
    coefficients: Option<Vec<f64>>,
    rows_read: usize,
    rows_filtered: usize,
    rows_dropped: usize,
    clamped: usize,
    metrics: FitMetrics,
}

fn cmd_regress(g: &Global, a: &DataArgs, model: Estimator, points: usize) -> Result<()> {
    let p = prepare(g, a)?;
    let mode = effective_mode(g, a.format);
    let q = p.train.dim();
    let curve_x: Dataset = if q == 1 {
        if points < 2 {
            return Err(Error::Parameter("at least two curve points are required".into()));
        }
        Dataset::from_column(density::linspace(p.support.lower()[0], p.support.upper()[0], points))?
    } else {
        p.eval.inputs().clone()
    };
    let (curve, meta) = match model {
        Estimator::Kernel => {
            let kernel = Kernel::new(g.kernel, q)?;
            let (h, how) = match bandwidth_choice(g)? {
                BandwidthChoice::Fixed(h) => (h, "fixed"),
                BandwidthChoice::Cv => (bandwidth::cv_select_at(&p.train, p.eval.inputs(), &kernel, &p.scales, &cv_config(g, &p, mode)?)?.h_star, "cv"),
            };
            let fit = RegressionModel::new(p.train.clone(), kernel, h, &p.scales, mode)?;
            let curve = fit.predict_many(&curve_x)?.values;
            let metrics = fit.fit_metrics(&p.eval)?;
            (curve, (Some(g.kernel), Some(h), Some(how), None, metrics))
        }
        Estimator::Linear => {
            let fit = baselines::ols_fit(&p.train)?;
            let curve = curve_x.rows().map(|x| fit.predict(x)).collect();
            let metrics = baselines::baseline_metrics(Baseline::Linear(&fit), &p.eval)?;
            (curve, (None, None, None, Some(fit.coefficients), metrics))
        }
        Estimator::Logistic => {
            let fit = baselines::logistic_fit(&p.train, 100, 1e-8)?;
            let curve = curve_x.rows().map(|x| fit.predict(x)).collect();
            let metrics = baselines::baseline_metrics(Baseline::Logistic(&fit), &p.eval)?;
            (curve, (None, None, None, Some(fit.coefficients), metrics))
        }
    };
    let mut header: Vec<String> = if q == 1 { vec!["x".into()] } else { curve_x.column_names().to_vec() };
    header.push("m_hat".into());
    let mut cols: Vec<Vec<f64>> = (0..q).map(|j| curve_x.column(j)).collect();
    cols.push(curve);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let col_refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    io::write_columns(g.out.join("curve.csv"), &header_refs, &col_refs)?;
    let (kernel, bandwidth, how, coefficients, metrics) = meta;
    io::write_json(
        g.out.join("metrics.json"),
        &RegressMeta {
            model,
            mode,
            kernel,
            bandwidth,
            bandwidth_selection: how,
            epsilon: p.epsilon,
            scales: p.scales.clone(),
            seed: g.seed,
            coefficients,
            rows_read: p.rows_read,
            rows_filtered: p.filtered,
            rows_dropped: p.dropped,
            clamped: p.clamped,
            metrics,
        },
    )
}

fn cmd_cv(g: &Global, a: &DataArgs) -> Result<()> {
    let p = prepare(g, a)?;
    let mode = effective_mode(g, a.format);
    let kernel = Kernel::new(g.kernel, p.train.dim())?;
    let outcome = bandwidth::cv_select_at(&p.train, p.eval.inputs(), &kernel, &p.scales, &cv_config(g, &p, mode)?)?;
    let hs: Vec<f64> = outcome.scores.iter().map(|s| s.bandwidth).collect();
    let scores: Vec<f64> = outcome.scores.iter().map(|s| s.score.unwrap_or(f64::NAN)).collect();
    let degenerate: Vec<f64> = outcome.scores.iter().map(|s| s.degenerate_folds as f64).collect();
    io::write_columns(g.out.join("cv.csv"), &["bandwidth", "score", "degenerate_folds"], &[&hs, &scores, &degenerate])?;
    io::write_json(g.out.join("cv.json"), &outcome)?;
    println!("bandwidth,score,degenerate_folds");
    for s in &outcome.scores {
        println!("{},{},{}", io::fmt_f64(s.bandwidth), io::fmt_f64(s.score.unwrap_or(f64::NAN)), s.degenerate_folds);
    }
    println!("# h_star={}", io::fmt_f64(outcome.h_star));
    Ok(())
}

#[derive(Serialize)]
struct SynthMeta {
    dist: &'static str,
    law: InputLaw,
    curve: Curve,
    n: usize,
    seed: u64,
    response_noise_sd: Option<f64>,
    lower: f64,
    upper: f64,
    mixture_second_component: &'static str,
    truncation: &'static str,
}

fn parse_law(dist: &str) -> Result<InputLaw> {
    match dist {
        "mixture" => Ok(InputLaw::mixture()),
        "chi2" => Ok(InputLaw::Chi2_3),
        other => Err(Error::Parameter(format!("unknown distribution `{other}` (mixture or chi2)"))),
    }
}

fn cmd_synth(g: &Global, dist: &str, curve: Curve, n: usize, noise_sd: f64) -> Result<()> {
    let law = parse_law(dist)?;
    let mut spec = SyntheticSpec::new(law, curve, n, g.seed);
    spec.response_noise_sd = noise_sd;
    let path = g.out.join("synth.csv");
    let with_response = curve != Curve::None;
    if with_response {
        let data = synthdata::make_regression_dataset(&spec)?;
        io::write_dataset(&path, data.inputs(), Some(("y", data.responses())))?;
    } else {
        io::write_dataset(&path, &synthdata::sample_inputs(&spec)?, None)?;
    }
    let support = law.support();
    io::write_json(
        g.out.join("synth.json"),
        &SynthMeta {
            dist: law.name(),
            law,
            curve,
            n,
            seed: g.seed,
            response_noise_sd: with_response.then_some(noise_sd),
            lower: support.lower()[0],
            upper: support.upper()[0],
            mixture_second_component: "N(1.5, variance 0.5)",
            truncation: "truncate then renormalize on the support",
        },
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    g: &Global,
    input: Option<&Path>,
    format: Format,
    x: &[String],
    y: &str,
    epsilons: &[f64],
    seeds: usize,
    models: &[Estimator],
    n: usize,
    gnuplot: bool,
) -> Result<()> {
    let mode = match input {
        Some(_) => effective_mode(g, format),
        None => g.mode,
    };
    let (data, recorded) = match input {
        Some(path) => {
            let ing = load_pairs(path, format, x, y)?;
            let ys = ing.responses.clone().ok_or_else(|| Error::Parameter("a response column is required".into()))?;
            (labeled(ing.inputs, ys, mode, format)?, ing.support)
        }
        None => {
            let law = InputLaw::mixture();
            (synthdata::make_regression_dataset(&SyntheticSpec::new(law, Curve::G2, n, g.seed))?, law.support())
        }
    };
    let (inputs, support, _) = fit_support(g, data.inputs().clone(), &recorded)?;
    let data = data.with_inputs(inputs)?;
    let metrics = match mode {
        Mode::Continuous => vec![Metric::Mse],
        Mode::Binary => vec![Metric::Mse, Metric::LogLikelihood],
    };
    let spec = SweepSpec::new(epsilons.to_vec(), SweepSpec::seeds_from(g.seed, seeds), models.to_vec(), metrics)?;
    let mut config = SweepConfig::new(g.kernel, support, mode);
    if let BandwidthChoice::Fixed(h) = bandwidth_choice(g)? {
        config.bandwidth = Some(h);
    }
    let results = sweep::run_sweep(&spec, &data, &config)?;
    sweep::emit_plotdata(&results, &g.out, Some(g.seed), gnuplot)?;
    Ok(())
}
