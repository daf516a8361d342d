use deconv_ldp::sweep::{run_sweep, Estimator, Metric, SweepConfig, SweepSpec};
use deconv_ldp::synthdata::{make_regression_dataset, Curve, InputLaw, SyntheticSpec};
use deconv_ldp::{KernelFamily, Mode};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 0 { 0.5 * (v[m - 1] + v[m]) } else { v[m] }
}

#[test]
fn kernel_mse_decreases_with_budget() {
    let law = InputLaw::mixture();
    let data = make_regression_dataset(&SyntheticSpec::new(law, Curve::G2, 2_000, 42)).unwrap();
    let epsilons = vec![1.0, 2.0, 5.0, 10.0, 20.0];
    let spec = SweepSpec::new(epsilons.clone(), SweepSpec::seeds_from(100, 10), vec![Estimator::Kernel], vec![Metric::Mse]).unwrap();
    let results = run_sweep(&spec, &data, &SweepConfig::new(KernelFamily::Gaussian, law.support(), Mode::Continuous)).unwrap();
    assert_eq!(results.rows.len(), epsilons.len() * 10 + 1);
    assert!(results.rows.iter().all(|r| r.failure.is_none()));
    let medians: Vec<f64> = epsilons
        .iter()
        .map(|&e| median(results.rows.iter().filter(|r| r.epsilon == Some(e)).map(|r| r.value(Metric::Mse)).collect()))
        .collect();
    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(inversions <= 1, "medians {medians:?}");
    let reference = results.rows.iter().find(|r| r.is_reference()).unwrap().value(Metric::Mse);
    assert!(medians.iter().all(|&m| m >= reference * 0.9), "medians {medians:?} vs noiseless {reference}");
}
