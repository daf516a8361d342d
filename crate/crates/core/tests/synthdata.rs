mod common;

use common::simpson;
use deconv_ldp::synthdata::{curve_value, make_regression_dataset, sample_inputs, Curve, InputLaw, SyntheticSpec};

/// Kolmogorov-Smirnov distance against a CDF tabulated by quadrature of the truncated density.
fn ks_distance(law: InputLaw, mut xs: Vec<f64>) -> f64 {
    let support = law.support();
    let (lo, hi) = (support.lower()[0], support.upper()[0]);
    let density = law.truncated_density();
    let cells = 4000;
    let step = (hi - lo) / cells as f64;
    let mut table = vec![0.0; cells + 1];
    for k in 0..cells {
        let a = lo + k as f64 * step;
        let piece = match law {
            InputLaw::Chi2_3 => simpson(|t| 2.0 * t * density(t * t), a.sqrt(), (a + step).sqrt(), 20),
            _ => simpson(&density, a, a + step, 20),
        };
        table[k + 1] = table[k] + piece;
    }
    assert!((table[cells] - 1.0).abs() < 1e-8, "total mass {}", table[cells]);
    let cdf = |x: f64| {
        let pos = ((x - lo) / step).clamp(0.0, cells as f64);
        let k = (pos.floor() as usize).min(cells - 1);
        table[k] + (pos - k as f64) * (table[k + 1] - table[k])
    };
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn samples_follow_truncated_laws() {
    for law in [InputLaw::mixture(), InputLaw::Chi2_3] {
        let n = 20_000;
        let data = sample_inputs(&SyntheticSpec::new(law, Curve::None, n, 11)).unwrap();
        let d = ks_distance(law, data.records().to_vec());
        // 1% critical value of the one-sample KS statistic
        assert!(d < 1.63 / (n as f64).sqrt(), "{}: KS distance {d}", law.name());
    }
}

#[test]
fn single_component_mean_matches_truncated_normal() {
    let law = InputLaw::GaussMixture { weights: [1.0, 0.0] };
    let n = 100_000;
    let data = sample_inputs(&SyntheticSpec::new(law, Curve::None, n, 3)).unwrap();
    let mean = data.records().iter().sum::<f64>() / n as f64;
    let density = law.truncated_density();
    let expected = simpson(|x| x * density(x), -3.0, 3.0, 20_000);
    let var = simpson(|x| (x - expected).powi(2) * density(x), -3.0, 3.0, 20_000);
    assert!((mean - expected).abs() < 4.0 * (var / n as f64).sqrt(), "mean {mean} vs {expected}");
    assert!(expected > -1.0, "truncation at -3 lifts the mean");
}

#[test]
fn residual_variance_is_unit() {
    for curve in [Curve::G1, Curve::G2] {
        let data = make_regression_dataset(&SyntheticSpec::new(InputLaw::mixture(), curve, 100_000, 5)).unwrap();
        let n = data.n() as f64;
        let resid: Vec<f64> = data
            .inputs()
            .records()
            .iter()
            .zip(data.responses())
            .map(|(&x, &y)| y - curve_value(curve, x))
            .collect();
        let mean = resid.iter().sum::<f64>() / n;
        let var = resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.05, "{curve:?}: residual variance {var}");
    }
}

#[test]
fn deterministic_and_inside_support() {
    for law in [InputLaw::mixture(), InputLaw::Chi2_3] {
        let spec = SyntheticSpec::new(law, Curve::G2, 5_000, 99);
        let a = make_regression_dataset(&spec).unwrap();
        let b = make_regression_dataset(&spec).unwrap();
        assert_eq!(a.inputs().records(), b.inputs().records());
        assert_eq!(a.responses(), b.responses());
        assert!(a.inputs().check_support(&law.support()).is_ok());
        let other = make_regression_dataset(&SyntheticSpec::new(law, Curve::G2, 5_000, 100)).unwrap();
        assert_ne!(a.inputs().records(), other.inputs().records());
    }
}

#[test]
fn curve_values() {
    assert_eq!(curve_value(Curve::G1, 1.0), 0.0);
    assert!((curve_value(Curve::G1, 2.0) - (-12.0 / 5.0)).abs() < 1e-15);
    assert!((curve_value(Curve::G2, 0.0) + 5.0).abs() < 1e-15);
    assert!((curve_value(Curve::G2, std::f64::consts::FRAC_PI_2) + 0.5).abs() < 1e-12);
}
