//! Scalar statistical primitives: normal cdf and quantile, incomplete beta
//! and gamma functions with the F and chi-square distributions, sample
//! moments, Jarque-Bera, and a quadrature oracle for `Var([Z - tau]_+)`.

mod moments;
mod normal;
mod oracle;
mod special;

pub use moments::{jarque_bera, JarqueBera, MomentSummary};
pub use normal::{erfc, normal_cdf, normal_pdf, normal_quantile, normal_sf};
pub use oracle::cov_pospart_oracle;
pub use special::{
    beta_inc, chi2_quantile, chi2_ratio_sf, chi2_sf, f_cdf, f_quantile, f_sf, gamma_inc_lower,
    gamma_inc_upper, ln_gamma,
};
