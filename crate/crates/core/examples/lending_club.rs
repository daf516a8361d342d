//! Optional check of Lending Club MSE against reference values. Needs the
//! accepted-loans CSV (Kaggle, login required), which is not shipped.
//!
//! cargo run --release --example lending_club -- path/to/accepted_2007_to_2018Q4.csv [seeds]
//!
//! Passes when each mean MSE is within 15% of its reference value.

use deconv_ldp::io::prepare_lending_club;
use deconv_ldp::sweep::{run_sweep, Estimator, Metric, SweepConfig, SweepSpec};
use deconv_ldp::{KernelFamily, Mode};

const BAND: f64 = 0.15;
// (estimator, ε, reference MSE)
const REFERENCE: [(Estimator, Option<f64>, f64); 4] = [
    (Estimator::Kernel, None, 4.42),
    (Estimator::Linear, None, 4.61),
    (Estimator::Kernel, Some(5.0), 5.70),
    (Estimator::Linear, Some(5.0), 7.11),
];

fn main() -> std::process::ExitCode {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: lending_club <accepted loans csv> [seeds]");
        return std::process::ExitCode::from(2);
    };
    let seeds: usize = args.next().map_or(5, |s| s.parse().expect("seed count"));
    let ing = prepare_lending_club(&path).expect("readable Lending Club file");
    println!("{} loans after filtering ({} read, {} filtered, {} dropped)", ing.inputs.n(), ing.rows_read, ing.filtered, ing.dropped);
    let data = ing.labeled().unwrap();
    let spec = SweepSpec::new(vec![5.0], SweepSpec::seeds_from(0, seeds), vec![Estimator::Kernel, Estimator::Linear], vec![Metric::Mse]).unwrap();
    let config = SweepConfig::new(KernelFamily::Gaussian, ing.support.clone(), Mode::Continuous);
    let results = run_sweep(&spec, &data, &config).unwrap();
    let mut ok = true;
    for (est, eps, want) in REFERENCE {
        let vals: Vec<f64> = results.rows.iter().filter(|r| r.estimator == est && r.epsilon == eps).map(|r| r.value(Metric::Mse)).collect();
        let got = vals.iter().sum::<f64>() / vals.len() as f64;
        let pass = (got - want).abs() <= BAND * want;
        ok &= pass;
        let eps = eps.map_or("none".to_string(), |e| e.to_string());
        println!("{} {} eps={eps}: mse {got:.3} vs {want} (±15%)", if pass { "PASS" } else { "FAIL" }, est.name());
    }
    if ok { std::process::ExitCode::SUCCESS } else { std::process::ExitCode::FAILURE }
}
