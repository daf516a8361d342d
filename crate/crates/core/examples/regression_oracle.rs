//! Direct-sum reference for the synthetic recovery threshold.
//!
//! Draws the g2 / mixture data through the library generators and noise
//! mechanism, then selects the bandwidth and evaluates the estimator with
//! plain double loops written from the formulas alone. Prints the RMSE
//! against g2 for each seed; the acceptance threshold is frozen from this
//! output.
//!
//! cargo run --release --example regression_oracle

use deconv_ldp::synthdata::{curve_value, make_regression_dataset, Curve, InputLaw, SyntheticSpec};
use deconv_ldp::{laplace_scales, privatize};

fn adjusted_gaussian(r2: f64, u: f64) -> f64 {
    let phi = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    phi + r2 * (1.0 - u * u) * phi
}

fn nw(zs: &[f64], ys: &[f64], h: f64, b: f64, x: f64, skip: Option<usize>) -> f64 {
    let r2 = (b / h).powi(2);
    let (mut den, mut num) = (0.0, 0.0);
    for i in 0..zs.len() {
        if Some(i) != skip {
            let w = adjusted_gaussian(r2, (x - zs[i]) / h);
            den += w;
            num += w * ys[i];
        }
    }
    num / den
}

fn main() {
    let n = 10_000;
    let law = InputLaw::mixture();
    let params = laplace_scales(&law.support(), 10.0).unwrap();
    let b = params.scales()[0];
    let grid: Vec<f64> = (0..40).map(|k| 0.2 * (3.0f64 / 0.2).powf(k as f64 / 39.0)).collect();
    let eval: Vec<f64> = (0..200).map(|k| -2.5 + 5.0 * k as f64 / 199.0).collect();
    let mut rmses = Vec::new();
    for seed in 0..5u64 {
        let raw = make_regression_dataset(&SyntheticSpec::new(law, Curve::G2, n, seed)).unwrap();
        let zs = privatize(raw.inputs(), &params, seed).unwrap().records().to_vec();
        let xs = raw.inputs().records();
        let ys = raw.responses();
        // every fifth record as a held-out fold, scored at its raw input
        let folds: Vec<usize> = (0..n).step_by(5).collect();
        let (h, _) = grid
            .iter()
            .map(|&h| (h, folds.iter().map(|&j| (ys[j] - nw(&zs, ys, h, b, xs[j], Some(j))).powi(2)).sum::<f64>()))
            .fold((f64::NAN, f64::INFINITY), |best, c| if c.1 <= best.1 { c } else { best });
        let mse = eval.iter().map(|&x| (nw(&zs, ys, h, b, x, None) - curve_value(Curve::G2, x)).powi(2)).sum::<f64>() / eval.len() as f64;
        println!("seed {seed}: h = {h:.4}, rmse = {:.5}", mse.sqrt());
        rmses.push(mse.sqrt());
    }
    let worst = rmses.iter().cloned().fold(0.0, f64::max);
    println!("worst rmse {worst:.5}");
}
