mod common;

use common::{brute_nw, uniform_points};
use deconv_ldp::regression::PROB_CLIP;
use deconv_ldp::{Dataset, Kernel, KernelFamily, LabeledDataset, Mode, RegressionModel};
use proptest::prelude::*;

fn sample(n: usize, seed: u64) -> LabeledDataset {
    let xs = uniform_points(n, -3.0, 3.0, seed);
    let ys = xs.iter().zip(uniform_points(n, -0.5, 0.5, seed + 100)).map(|(x, e)| x.sin() + e).collect();
    LabeledDataset::new(Dataset::from_column(xs).unwrap(), ys).unwrap()
}

#[test]
fn matches_brute_force_sums() {
    let data = sample(400, 1);
    for family in [KernelFamily::Gaussian, KernelFamily::Cauchy] {
        let k = Kernel::new(family, 1).unwrap();
        for b in [0.0, 0.3] {
            let model = RegressionModel::new(data.clone(), k, 0.4, &[b], Mode::Continuous).unwrap();
            for x in [-2.9, -1.0, 0.0, 0.5, 2.2] {
                let (den, num) = brute_nw(&data, &k, 0.4, &[b], &[x], None);
                let got = model.predict(&[x]).unwrap();
                assert!(!got.degenerate);
                assert!((got.value - num / den).abs() < 1e-10, "{family} b={b} x={x}");
            }
        }
    }
}

#[test]
fn two_dimensional_matches_brute_force() {
    let pts = uniform_points(600, -1.0, 1.0, 9);
    let rows: Vec<Vec<f64>> = pts.chunks(2).map(|c| c.to_vec()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r[0] * r[1] + r[0]).collect();
    let data = LabeledDataset::new(Dataset::from_rows(&rows).unwrap(), ys).unwrap();
    let k = Kernel::gaussian(2);
    let model = RegressionModel::new(data.clone(), k, 0.5, &[0.1, 0.2], Mode::Continuous).unwrap();
    for x in [[0.0, 0.0], [0.5, -0.3]] {
        let (den, num) = brute_nw(&data, &k, 0.5, &[0.1, 0.2], &x, None);
        assert!((model.predict(&x).unwrap().value - num / den).abs() < 1e-10);
    }
}

#[test]
fn leave_one_out_equals_refit_without_the_record() {
    let data = sample(120, 2);
    let k = Kernel::cauchy(1);
    let model = RegressionModel::new(data.clone(), k, 0.5, &[0.2], Mode::Continuous).unwrap();
    for j in [0, 17, 119] {
        let x = data.inputs().row(j).to_vec();
        let refit = RegressionModel::new(data.without(j).unwrap(), k, 0.5, &[0.2], Mode::Continuous).unwrap();
        let a = model.predict_loo(j, &x).unwrap().value;
        let b = refit.predict(&x).unwrap().value;
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn batch_predictions_match_single() {
    let data = sample(200, 3);
    let model = RegressionModel::new(data.clone(), Kernel::gaussian(1), 0.3, &[0.25], Mode::Continuous).unwrap();
    let queries = Dataset::from_column(vec![0.1, -1.0, 0.1, 2.0, -1.0]).unwrap();
    let batch = model.predict_many(&queries).unwrap();
    for (q, v) in queries.records().iter().zip(&batch.values) {
        assert_eq!(*v, model.predict(&[*q]).unwrap().value);
    }
}

#[test]
fn far_queries_fall_back_or_are_flagged() {
    let data = sample(50, 4);
    let model = RegressionModel::new(data.clone(), Kernel::gaussian(1), 0.1, &[0.0], Mode::Continuous).unwrap();
    let p = model.predict(&[1e6]).unwrap();
    assert!(p.degenerate);
    let nearest = (0..data.n()).max_by(|&a, &b| data.inputs().row(a)[0].total_cmp(&data.inputs().row(b)[0])).unwrap();
    assert_eq!(p.value, data.responses()[nearest]);
}

#[test]
fn binary_predictions_are_clipped() {
    let xs = vec![0.0, 0.1, 0.2, 3.0, 3.1, 3.2];
    let ys = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
    let data = LabeledDataset::binary(Dataset::from_column(xs).unwrap(), ys).unwrap();
    let model = RegressionModel::new(data, Kernel::gaussian(1), 0.1, &[0.0], Mode::Binary).unwrap();
    assert_eq!(model.predict(&[0.1]).unwrap().value, PROB_CLIP);
    assert_eq!(model.predict(&[3.1]).unwrap().value, 1.0 - PROB_CLIP);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn translation_equivariant(shift in -50.0f64..50.0, x in -2.5f64..2.5, b in 0.0f64..0.5) {
        let data = sample(80, 5);
        let moved: Vec<f64> = data.inputs().records().iter().map(|v| v + shift).collect();
        let moved = data.with_inputs(Dataset::from_column(moved).unwrap()).unwrap();
        let a = RegressionModel::new(data, Kernel::gaussian(1), 0.6, &[b], Mode::Continuous).unwrap();
        let c = RegressionModel::new(moved, Kernel::gaussian(1), 0.6, &[b], Mode::Continuous).unwrap();
        let pa = a.predict(&[x]).unwrap().value;
        let pc = c.predict(&[x + shift]).unwrap().value;
        prop_assert!((pa - pc).abs() < 1e-8 * (1.0 + pa.abs()));
    }

    #[test]
    fn affine_in_the_response(scale in -10.0f64..10.0, offset in -10.0f64..10.0, x in -2.5f64..2.5) {
        let data = sample(80, 6);
        let ys: Vec<f64> = data.responses().iter().map(|y| scale * y + offset).collect();
        let other = LabeledDataset::new(data.inputs().clone(), ys).unwrap();
        let a = RegressionModel::new(data, Kernel::cauchy(1), 0.5, &[0.2], Mode::Continuous).unwrap();
        let c = RegressionModel::new(other, Kernel::cauchy(1), 0.5, &[0.2], Mode::Continuous).unwrap();
        let pa = a.predict(&[x]).unwrap().value;
        let pc = c.predict(&[x]).unwrap().value;
        prop_assert!((scale * pa + offset - pc).abs() < 1e-9 * (1.0 + pc.abs() + scale.abs()));
    }

    #[test]
    fn scaling_inputs_bandwidth_and_noise_together(c in 0.1f64..20.0, x in -2.5f64..2.5) {
        let data = sample(80, 7);
        let scaled: Vec<f64> = data.inputs().records().iter().map(|v| v * c).collect();
        let scaled = data.with_inputs(Dataset::from_column(scaled).unwrap()).unwrap();
        let a = RegressionModel::new(data, Kernel::gaussian(1), 0.5, &[0.3], Mode::Continuous).unwrap();
        let s = RegressionModel::new(scaled, Kernel::gaussian(1), 0.5 * c, &[0.3 * c], Mode::Continuous).unwrap();
        let pa = a.predict(&[x]).unwrap().value;
        let ps = s.predict(&[x * c]).unwrap().value;
        prop_assert!((pa - ps).abs() < 1e-8 * (1.0 + pa.abs()));
    }
}
