//! Density estimation and nonparametric regression on data privatized by
//! the Laplace mechanism.
//!
//! Records are privatized coordinate-wise with scale `b = q (x̄ - x̲) / ε`.
//! The estimators replace the kernel `K` by the adjusted kernel
//! `∏_j (1 - (b_j/h)² ∂_j²) K`, which cancels the Laplace blur in
//! expectation.

pub mod bandwidth;
pub mod baselines;
pub mod density;
pub mod error;
pub mod io;
pub mod kernels;
pub mod privacy;
pub mod regression;
pub mod rng;
pub mod sweep;
pub mod synthdata;

mod accumulate;

pub use error::{Error, Result};
pub use kernels::{AdjustedKernel, Kernel, KernelFamily};
pub use privacy::{laplace_scales, privatize, Dataset, PrivacyParams, SupportBox};
pub use regression::{LabeledDataset, Mode, RegressionModel};
