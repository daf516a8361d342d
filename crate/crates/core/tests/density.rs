mod common;

use std::f64::consts::PI;

use common::{brute_density, uniform_points};
use deconv_ldp::density::{self, default_grid, empirical_cf, ise, linspace, EstimatorTag};
use deconv_ldp::synthdata::{sample_inputs, Curve, InputLaw, SyntheticSpec};
use deconv_ldp::{laplace_scales, privatize, Dataset, Kernel, KernelFamily, SupportBox};

fn mixture_sample(n: usize, seed: u64) -> Dataset {
    sample_inputs(&SyntheticSpec::new(InputLaw::mixture(), Curve::None, n, seed)).unwrap()
}

#[test]
fn matches_direct_sums() {
    let data = Dataset::from_column(uniform_points(300, -2.0, 2.0, 1)).unwrap();
    let grid = linspace(-4.0, 4.0, 41);
    for family in [KernelFamily::Gaussian, KernelFamily::Cauchy] {
        let k = Kernel::new(family, 1).unwrap();
        for b in [0.0, 0.4] {
            let est = density::deconv_kde(&data, &k, 0.35, &[b], &grid).unwrap();
            for (x, v) in grid.iter().zip(&est.values) {
                assert!((v - brute_density(&data, &k, 0.35, &[b], *x)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn agrees_with_fourier_inversion() {
    let raw = mixture_sample(200, 4);
    let params = laplace_scales(&SupportBox::interval(-3.0, 3.0).unwrap(), 10.0).unwrap();
    let z = privatize(&raw, &params, 8).unwrap();
    let b = params.scales()[0];
    let h = 0.4;
    let xs = [-2.0, -0.5, 0.0, 1.3, 2.7];
    let est = density::deconv_kde(&z, &Kernel::gaussian(1), h, &[b], &xs).unwrap();
    // f(x) = (1/π) ∫₀^T Re[e^{-itx} φ̂_z(t)] Φ_K(th) / φ_L(t) dt
    let top = 40.0 / h;
    let m = 20_000;
    let step = top / m as f64;
    let cfs: Vec<_> = (0..=m).map(|k| empirical_cf(&z, &[k as f64 * step])).collect();
    for (x, got) in xs.iter().zip(&est.values) {
        let mut acc = 0.0;
        for (k, cf) in cfs.iter().enumerate() {
            let t = k as f64 * step;
            let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let phase = (-t * x).sin_cos();
            let re = cf.re * phase.1 - cf.im * phase.0;
            acc += w * re * (-0.5 * t * t * h * h).exp() * (1.0 + b * b * t * t);
        }
        let inverted = acc * step / 3.0 / PI;
        assert!((inverted - got).abs() < 1e-3, "x={x}: {inverted} vs {got}");
    }
}

#[test]
fn kde_has_unit_mass() {
    let data = mixture_sample(1000, 2);
    let h = 0.3;
    let grid = default_grid(&InputLaw::mixture().support(), &[0.0], h, 2001).unwrap();
    let est = density::kde(&data, &Kernel::gaussian(1), h, &grid).unwrap();
    assert!((est.mass().unwrap() - 1.0).abs() < 1e-3);
    assert!(est.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn deconv_is_unbiased_for_the_noiseless_estimate() {
    let raw = mixture_sample(100, 11);
    let params = laplace_scales(&InputLaw::mixture().support(), 10.0).unwrap();
    let k = Kernel::cauchy(1);
    let h = 0.3;
    let xs = [-1.0, 0.0, 1.5];
    let target = density::kde(&raw, &k, h, &xs).unwrap().values;
    let reps = 400;
    let mut sum = [0.0; 3];
    let mut sq = [0.0; 3];
    for seed in 0..reps {
        let z = privatize(&raw, &params, seed).unwrap();
        let v = density::deconv_kde(&z, &k, h, params.scales(), &xs).unwrap().values;
        for j in 0..3 {
            sum[j] += v[j];
            sq[j] += v[j] * v[j];
        }
    }
    for j in 0..3 {
        let mean = sum[j] / reps as f64;
        let se = ((sq[j] / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - target[j]).abs() < 4.0 * se, "x={}: {mean} vs {} (se {se})", xs[j], target[j]);
    }
}

#[test]
fn naive_estimate_is_flattened() {
    let law = InputLaw::mixture();
    let raw = mixture_sample(5000, 21);
    let params = laplace_scales(&law.support(), 10.0).unwrap();
    let z = privatize(&raw, &params, 3).unwrap();
    let k = Kernel::gaussian(1);
    let h = 0.35;
    let grid = default_grid(&law.support(), params.scales(), h, 801).unwrap();
    let naive = density::naive_kde(&z, &k, h, &grid).unwrap();
    let deconv = density::deconv_kde(&z, &k, h, params.scales(), &grid).unwrap();
    let peak = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max);
    assert!(peak(&naive.values) < peak(&deconv.values));
    let truth = law.truncated_density();
    assert!(ise(&naive, &truth).unwrap() > ise(&deconv, &truth).unwrap());
    assert_eq!(naive.estimator_tag, EstimatorTag::NaiveKde);
}

#[test]
fn nonneg_repair_keeps_unit_mass() {
    let raw = mixture_sample(300, 5);
    let params = laplace_scales(&InputLaw::mixture().support(), 2.0).unwrap();
    let z = privatize(&raw, &params, 1).unwrap();
    let h = 0.5;
    let grid = default_grid(&InputLaw::mixture().support(), params.scales(), h, 1001).unwrap();
    let est = density::deconv_kde(&z, &Kernel::gaussian(1), h, params.scales(), &grid).unwrap();
    assert!(est.values.iter().any(|v| *v < 0.0));
    let fixed = est.clipped_and_renormalized().unwrap();
    assert!(fixed.values.iter().all(|v| *v >= 0.0));
    assert!((fixed.mass().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn two_dimensional_product_grid() {
    let rows: Vec<Vec<f64>> = uniform_points(200, -1.0, 1.0, 3).chunks(2).map(|c| c.to_vec()).collect();
    let data = Dataset::from_rows(&rows).unwrap();
    let support = SupportBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
    let grid = default_grid(&support, &[0.1, 0.2], 0.3, 61).unwrap();
    let est = density::deconv_kde(&data, &Kernel::gaussian(2), 0.3, &[0.1, 0.2], &grid).unwrap();
    let ax = linspace(-1.0 - 0.4 - 1.2, 1.0 + 0.4 + 1.2, 61);
    let ay = linspace(-1.0 - 0.8 - 1.2, 1.0 + 0.8 + 1.2, 61);
    let (dx, dy) = (ax[1] - ax[0], ay[1] - ay[0]);
    let mass: f64 = est.values.iter().sum::<f64>() * dx * dy;
    assert!((mass - 1.0).abs() < 1e-2, "{mass}");
}
