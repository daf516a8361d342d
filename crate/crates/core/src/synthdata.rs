//! Simulation-study generators: truncated input laws, regression curves and
//! Gaussian response noise.
//!
//! The mixture's second component `N(3/2, 1/2)` is read as variance ½. Both
//! targets are truncated to their box and renormalized there.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::privacy::{Dataset, SupportBox};
use crate::regression::LabeledDataset;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputLaw {
    /// `w₁ N(-1, 1) + w₂ N(3/2, 1/2)` on `[-3, 3]`.
    GaussMixture { weights: [f64; 2] },
    /// `χ²(3)` on `[0, 3]`.
    Chi2_3,
}

impl InputLaw {
    pub fn mixture() -> Self {
        InputLaw::GaussMixture { weights: [1.0 / 3.0, 2.0 / 3.0] }
    }

    pub fn support(&self) -> SupportBox {
        let (lo, hi) = match self {
            InputLaw::GaussMixture { .. } => (-3.0, 3.0),
            InputLaw::Chi2_3 => (0.0, 3.0),
        };
        SupportBox::interval(lo, hi).expect("static support")
    }

    pub fn name(&self) -> &'static str {
        match self {
            InputLaw::GaussMixture { .. } => "mixture",
            InputLaw::Chi2_3 => "chi2",
        }
    }

    /// Density of the untruncated law.
    pub fn raw_density(&self, x: f64) -> f64 {
        match *self {
            InputLaw::GaussMixture { weights } => {
                let normal = |m: f64, var: f64| (-(x - m) * (x - m) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
                weights[0] * normal(-1.0, 1.0) + weights[1] * normal(1.5, 0.5)
            }
            InputLaw::Chi2_3 => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.sqrt() * (-0.5 * x).exp() / (2.0 * PI).sqrt()
                }
            }
        }
    }

    /// Mass of the untruncated law inside the support, by composite Simpson.
    pub fn support_mass(&self) -> f64 {
        match self {
            InputLaw::GaussMixture { .. } => simpson(|x| self.raw_density(x), -3.0, 3.0, 20_000),
            // substitute x = t² to remove the square-root cusp at 0
            InputLaw::Chi2_3 => simpson(|t| 2.0 * t * self.raw_density(t * t), 0.0, 3f64.sqrt(), 20_000),
        }
    }

    /// Returns the truncated, renormalized density.
    pub fn truncated_density(&self) -> impl Fn(f64) -> f64 + Send + Sync + '_ {
        let mass = self.support_mass();
        let support = self.support();
        let (lo, hi) = (support.lower()[0], support.upper()[0]);
        move |x| if x < lo || x > hi { 0.0 } else { self.raw_density(x) / mass }
    }

    fn draw_raw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            InputLaw::GaussMixture { weights } => {
                let total = weights[0] + weights[1];
                if rng.random::<f64>() * total < weights[0] {
                    Normal::new(-1.0, 1.0).expect("valid").sample(rng)
                } else {
                    Normal::new(1.5, 0.5f64.sqrt()).expect("valid").sample(rng)
                }
            }
            InputLaw::Chi2_3 => ChiSquared::new(3.0).expect("valid").sample(rng),
        }
    }

    /// Rejection sampling from the untruncated law until inside the box.
    pub fn draw(&self, rng: &mut impl Rng) -> f64 {
        let support = self.support();
        let (lo, hi) = (support.lower()[0], support.upper()[0]);
        loop {
            let x = self.draw_raw(rng);
            if x >= lo && x <= hi {
                return x;
            }
        }
    }
}

pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let dx = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * dx) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * dx / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    G1,
    G2,
    None,
}

impl std::str::FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g1" => Ok(Curve::G1),
            "g2" => Ok(Curve::G2),
            "none" => Ok(Curve::None),
            other => Err(Error::param(format!("unknown curve `{other}`"))),
        }
    }
}

/// `g₁(x) = x²(1 - x²)/5`, `g₂(x) = 4.5 sin x - 5`.
pub fn curve_value(curve: Curve, x: f64) -> f64 {
    match curve {
        Curve::G1 => x * x * (1.0 - x * x) / 5.0,
        Curve::G2 => 4.5 * x.sin() - 5.0,
        Curve::None => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub law: InputLaw,
    pub curve: Curve,
    pub n: usize,
    pub seed: u64,
    pub response_noise_sd: f64,
}

impl SyntheticSpec {
    pub fn new(law: InputLaw, curve: Curve, n: usize, seed: u64) -> Self {
        SyntheticSpec { law, curve, n, seed, response_noise_sd: 1.0 }
    }
}

/// `n` i.i.d. inputs; record `i` uses its own substream.
pub fn sample_inputs(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(Error::param("sample size must be at least 1"));
    }
    let xs: Vec<f64> = (0..spec.n)
        .into_par_iter()
        .map(|i| spec.law.draw(&mut rng::substream(spec.seed, Domain::SynthInput, i as u64)))
        .collect();
    Dataset::from_column(xs)?.with_column_names(vec!["x".into()])
}

/// Inputs with responses `y = g(x) + σ v`, `v ~ N(0, 1)`.
pub fn make_regression_dataset(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    if spec.curve == Curve::None {
        return Err(Error::param("a regression dataset needs a curve"));
    }
    if !(spec.response_noise_sd >= 0.0) {
        return Err(Error::param("response noise standard deviation must be nonnegative"));
    }
    let inputs = sample_inputs(spec)?;
    let ys = inputs
        .records()
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let v: f64 = StandardNormal.sample(&mut rng::substream(spec.seed, Domain::SynthResponse, i as u64));
            curve_value(spec.curve, x) + spec.response_noise_sd * v
        })
        .collect();
    LabeledDataset::new(inputs, ys)
}
