//! Comparison tests: the generalised likelihood ratio test and the
//! bootstrap-corrected spectral test.

mod glr;
mod spectral;
mod tw1;

pub use glr::{chi2_quantile, chi2_survival, glr_test, glr_test_saturated, GlrResult};
pub use spectral::{eigen_extremes, lei_bootstrap_test, lei_residual, SpectralResult};
pub use tw1::{tw1_cdf, tw1_mean, tw1_quantile, tw1_sd, Tw1Table};
