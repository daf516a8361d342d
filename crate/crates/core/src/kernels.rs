//! Smoothing kernels and their Laplace-deconvolution adjustments.
//!
//! Only product-form kernels are supported, so the operator
//! `∏_j (1 - r_j² ∂²/∂x_j²)` with `r_j = b_j / h` factorizes into one
//! closed-form factor per dimension.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Gaussian,
    Cauchy,
}

impl KernelFamily {
    /// One-dimensional density.
    #[inline]
    pub fn value_1d(self, u: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * u * u).exp(),
            KernelFamily::Cauchy => 1.0 / (PI * (1.0 + u * u)),
        }
    }

    /// Second derivative of the one-dimensional density.
    #[inline]
    pub fn d2_1d(self, u: f64) -> f64 {
        let u2 = u * u;
        match self {
            KernelFamily::Gaussian => (u2 - 1.0) * self.value_1d(u),
            KernelFamily::Cauchy => {
                let s = 1.0 + u2;
                (6.0 * u2 - 2.0) / (PI * s * s * s)
            }
        }
    }

    /// Fourth derivative of the one-dimensional density.
    #[inline]
    pub fn d4_1d(self, u: f64) -> f64 {
        let u2 = u * u;
        match self {
            KernelFamily::Gaussian => (u2 * u2 - 6.0 * u2 + 3.0) * self.value_1d(u),
            KernelFamily::Cauchy => {
                let s = 1.0 + u2;
                let s2 = s * s;
                24.0 * (5.0 * u2 * u2 - 10.0 * u2 + 1.0) / (PI * s2 * s2 * s)
            }
        }
    }

    /// Characteristic function of the one-dimensional density.
    #[inline]
    pub fn cf_1d(self, t: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => (-0.5 * t * t).exp(),
            KernelFamily::Cauchy => (-t.abs()).exp(),
        }
    }

    /// `(1 - r² d²/du²) K(u)` with `r2 = r²`.
    #[inline(always)]
    pub fn adjusted_1d(self, r2: f64, u: f64) -> f64 {
        let u2 = u * u;
        match self {
            KernelFamily::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * u2).exp() * (1.0 + r2 - r2 * u2),
            KernelFamily::Cauchy => {
                // 1/s - r²(8u²/s³ - 2/s²) with u² = s - 1
                let s = 1.0 + u2;
                let inv = 1.0 / s;
                (inv + r2 * (8.0 - 6.0 * s) * inv * inv * inv) * (1.0 / PI)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "gaussian",
            KernelFamily::Cauchy => "cauchy",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(KernelFamily::Gaussian),
            "cauchy" => Ok(KernelFamily::Cauchy),
            other => Err(Error::param(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Product-form base kernel in `dim` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    pub family: KernelFamily,
    pub dim: usize,
}

impl Kernel {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("kernel dimension must be at least 1"));
        }
        Ok(Kernel { family, dim })
    }

    pub fn gaussian(dim: usize) -> Self {
        Kernel { family: KernelFamily::Gaussian, dim: dim.max(1) }
    }

    pub fn cauchy(dim: usize) -> Self {
        Kernel { family: KernelFamily::Cauchy, dim: dim.max(1) }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.family {
            // single exp for the whole vector
            KernelFamily::Gaussian => {
                let ss: f64 = x.iter().map(|v| v * v).sum();
                FRAC_1_SQRT_2PI.powi(self.dim as i32) * (-0.5 * ss).exp()
            }
            KernelFamily::Cauchy => x.iter().map(|&v| self.family.value_1d(v)).product(),
        }
    }

    /// Characteristic function `Φ_K(t)`.
    pub fn cf(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.dim);
        t.iter().map(|&v| self.family.cf_1d(v)).product()
    }
}

/// Base kernel paired with noise-to-bandwidth ratios `r_j = b_j / h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustedKernel {
    base: Kernel,
    ratios: Vec<f64>,
}

impl AdjustedKernel {
    pub fn new(base: Kernel, ratios: Vec<f64>) -> Result<Self> {
        if ratios.len() != base.dim {
            return Err(Error::param(format!(
                "{} ratios given for a {}-dimensional kernel",
                ratios.len(),
                base.dim
            )));
        }
        if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::param("noise-to-bandwidth ratios must be finite and nonnegative"));
        }
        Ok(AdjustedKernel { base, ratios })
    }

    /// Adjusted kernel for Laplace scales `scales` at bandwidth `h`.
    pub fn for_bandwidth(base: Kernel, scales: &[f64], h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::param(format!("bandwidth must be positive and finite, got {h}")));
        }
        Self::new(base, scales.iter().map(|b| b / h).collect())
    }

    pub fn base(&self) -> &Kernel {
        &self.base
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.ratios.len());
        if self.ratios.iter().all(|r| *r == 0.0) {
            return self.base.value(x);
        }
        x.iter()
            .zip(&self.ratios)
            .map(|(&u, &r)| self.base.family.adjusted_1d(r * r, u))
            .product()
    }

    /// Fourier transform `Φ_K(t) ∏ (1 + r_j² t_j²)`.
    pub fn cf(&self, t: &[f64]) -> f64 {
        self.base.cf(t) * t.iter().zip(&self.ratios).map(|(t, r)| 1.0 + r * r * t * t).product::<f64>()
    }
}

/// Applies `∏ (1 - r_j² ∂²/∂x_j²)` to the base kernel by nested five-point
/// central differences with step `5e-3`. Slow; intended as a check on the
/// closed forms.
pub fn adjusted_value_numeric(kernel: &Kernel, ratios: &[f64], x: &[f64]) -> f64 {
    const STEP: f64 = 5e-3;
    fn apply(kernel: &Kernel, ratios: &[f64], x: &mut Vec<f64>, j: usize) -> f64 {
        if j == ratios.len() {
            return kernel.value(x);
        }
        let centre = apply(kernel, ratios, x, j + 1);
        if ratios[j] == 0.0 {
            return centre;
        }
        let x0 = x[j];
        let mut at = |offset: f64| {
            x[j] = x0 + offset;
            apply(kernel, ratios, x, j + 1)
        };
        let (p1, m1, p2, m2) = (at(STEP), at(-STEP), at(2.0 * STEP), at(-2.0 * STEP));
        x[j] = x0;
        let d2 = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * centre) / (12.0 * STEP * STEP);
        centre - ratios[j] * ratios[j] * d2
    }
    let mut point = x.to_vec();
    apply(kernel, ratios, &mut point, 0)
}

/// Characteristic function of independent Laplace noise, `∏ 1 / (1 + b_j² t_j²)`.
pub fn laplace_cf(scales: &[f64], t: &[f64]) -> f64 {
    scales.iter().zip(t).map(|(b, t)| 1.0 / (1.0 + b * b * t * t)).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        let dx = (b - a) / m as f64;
        let mut s = 0.5 * (f(a) + f(b));
        for i in 1..m {
            s += f(a + i as f64 * dx);
        }
        s * dx
    }

    #[test]
    fn base_values() {
        assert_relative_eq!(Kernel::gaussian(1).value(&[0.0]), 0.3989422804014327, max_relative = 1e-15);
        assert_relative_eq!(Kernel::cauchy(1).value(&[0.0]), 1.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(Kernel::gaussian(2).value(&[0.0, 0.0]), 1.0 / (2.0 * PI), max_relative = 1e-15);
        let c2 = Kernel::cauchy(2);
        assert_relative_eq!(c2.value(&[0.5, -2.0]), 1.0 / (PI * 1.25) / (PI * 5.0), max_relative = 1e-15);
    }

    #[test]
    fn base_kernels_have_unit_mass() {
        let g = trapezoid(|u| KernelFamily::Gaussian.value_1d(u), -12.0, 12.0, 24_000);
        assert!((g - 1.0).abs() < 1e-6);
        // analytic tail beyond ±L for the Cauchy
        let l = 1_000.0;
        let c = trapezoid(|u| KernelFamily::Cauchy.value_1d(u), -l, l, 2_000_000)
            + 2.0 * (0.5 - l.atan() / PI);
        assert!((c - 1.0).abs() < 1e-6, "{c}");
    }

    #[test]
    fn adjusted_closed_forms() {
        let c = AdjustedKernel::new(Kernel::cauchy(1), vec![1.0]).unwrap();
        assert_relative_eq!(c.value(&[0.0]), 3.0 / PI, max_relative = 1e-15);
        let g = AdjustedKernel::new(Kernel::gaussian(1), vec![1.0]).unwrap();
        assert_relative_eq!(g.value(&[0.0]), 2.0 * FRAC_1_SQRT_2PI, max_relative = 1e-15);
        // literal form of the Cauchy factor
        let r: f64 = 0.7;
        for x in [-3.0, -0.4, 0.0, 0.9, 5.0] {
            let s: f64 = 1.0 + x * x;
            let literal = (1.0 / s - r * r * 8.0 * x * x / s.powi(3) + r * r * 2.0 / (s * s)) / PI;
            let ak = AdjustedKernel::new(Kernel::cauchy(1), vec![r]).unwrap();
            assert_relative_eq!(ak.value(&[x]), literal, max_relative = 1e-13);
        }
    }

    #[test]
    fn zero_ratio_reduces_to_base() {
        for family in [KernelFamily::Gaussian, KernelFamily::Cauchy] {
            let k = Kernel::new(family, 2).unwrap();
            let ak = AdjustedKernel::new(k, vec![0.0, 0.0]).unwrap();
            for x in [[0.0, 0.0], [1.5, -0.3], [-7.0, 2.0]] {
                assert_eq!(ak.value(&x), k.value(&x));
                assert!((adjusted_value_numeric(&k, &[0.0, 0.0], &x) - k.value(&x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn finite_differences_agree_with_closed_forms() {
        let c = Kernel::cauchy(1);
        assert!((adjusted_value_numeric(&c, &[1.0], &[0.0]) - 3.0 / PI).abs() < 1e-6);
        let g = Kernel::gaussian(1);
        let closed = AdjustedKernel::new(g, vec![0.5]).unwrap().value(&[1.0]);
        assert!((adjusted_value_numeric(&g, &[0.5], &[1.0]) - closed).abs() < 1e-6);
        // two dimensions
        for family in [KernelFamily::Gaussian, KernelFamily::Cauchy] {
            let k = Kernel::new(family, 2).unwrap();
            let ak = AdjustedKernel::new(k, vec![0.3, 1.2]).unwrap();
            for x in [[0.0, 0.0], [0.7, -1.1], [2.5, 0.4]] {
                let err = (adjusted_value_numeric(&k, ak.ratios(), &x) - ak.value(&x)).abs();
                assert!(err < 1e-6, "{family} at {x:?}: {err}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-3;
        for family in [KernelFamily::Gaussian, KernelFamily::Cauchy] {
            for u in [-2.3, -0.5, 0.0, 0.8, 3.1] {
                let d2 = (family.value_1d(u + h) - 2.0 * family.value_1d(u) + family.value_1d(u - h)) / (h * h);
                assert!((d2 - family.d2_1d(u)).abs() < 1e-5, "{family} d2 at {u}");
                let d4 = (family.d2_1d(u + h) - 2.0 * family.d2_1d(u) + family.d2_1d(u - h)) / (h * h);
                assert!((d4 - family.d4_1d(u)).abs() < 1e-4, "{family} d4 at {u}");
            }
        }
    }

    #[test]
    fn characteristic_functions() {
        assert_eq!(Kernel::gaussian(1).cf(&[0.0]), 1.0);
        assert_relative_eq!(Kernel::gaussian(1).cf(&[2.0]), (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(Kernel::cauchy(1).cf(&[1.0]), 0.36787944117144233, max_relative = 1e-15);
        // Fourier integral of the Cauchy density at t = 1
        let l = 2_000.0;
        let numeric = trapezoid(|u| u.cos() * KernelFamily::Cauchy.value_1d(u), -l, l, 4_000_000);
        assert!((numeric - (-1.0f64).exp()).abs() < 1e-4, "{numeric}");

        assert_eq!(laplace_cf(&[1.0], &[0.0]), 1.0);
        assert_eq!(laplace_cf(&[1.0], &[1.0]), 0.5);
        assert_relative_eq!(laplace_cf(&[0.2, 0.5], &[1.0, 2.0]), 1.0 / (1.04 * 2.0), max_relative = 1e-15);
    }

    #[test]
    fn construction_errors() {
        assert!(Kernel::new(KernelFamily::Gaussian, 0).is_err());
        assert!(AdjustedKernel::new(Kernel::cauchy(1), vec![1.0, 2.0]).is_err());
        assert!(AdjustedKernel::new(Kernel::cauchy(1), vec![-1.0]).is_err());
        assert!(AdjustedKernel::for_bandwidth(Kernel::cauchy(1), &[1.0], 0.0).is_err());
        assert_eq!("Cauchy".parse::<KernelFamily>().unwrap(), KernelFamily::Cauchy);
        assert!("epanechnikov".parse::<KernelFamily>().is_err());
    }
}
