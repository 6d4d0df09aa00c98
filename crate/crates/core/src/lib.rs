//! Risk-averse stochastic programming with discrete-Kusuoka risk measures.
//!
//! The crate estimates risk measures of the form
//! `R(Z) = w0 E[Z] + sum_i wi AVaR_{ai}(Z)` from samples, solves programs
//! `min_x R(G(x, xi))` by sample average approximation ([`saa`]) and by
//! robust stochastic approximation with finite-sample confidence bounds
//! ([`rsa`]), and tests hypotheses on the optimal values of several such
//! programs ([`hyptest`]).
//!
//! ```
//! use riskopt::{risk_plugin, EmpiricalDistribution, RiskSpec};
//!
//! let spec = RiskSpec::mean_avar(0.0, 1.0, 0.5).unwrap();
//! let dist = EmpiricalDistribution::from_slice(&[1.0, 2.0, 3.0, 4.0]).unwrap();
//! assert_eq!(risk_plugin(&dist, &spec), 3.5);
//! ```

pub mod error;
pub mod hyptest;
pub mod program;
pub mod risk;
pub mod rng;
pub mod rsa;
pub mod saa;
pub mod samplers;
pub mod stats;

pub use nalgebra;

pub use error::{Error, Result};
pub use hyptest::{
    as_test_two_sample, as_test_value, hotelling_subspace_test, na_test_dominance,
    na_test_equality, na_test_ordered, na_test_value, perlman_cone_test, separation_margin,
    ConeKind, ConeSpec, ConfidenceInterval, HotellingScaling, IntervalMethod, TestKind,
    TestOutcome, TwoSampleHypothesis, ValueHypothesis,
};
pub use program::{
    FeasibleSet, PortfolioProgram, Regularizer, SingletonProgram, StochasticProgram,
};
pub use risk::{
    avar_closed, avar_variational, empirical_quantile, phi, quantile_block, quantile_interval,
    risk_plugin, risk_plugin_maxset, EmpiricalDistribution, RiskSpec, VariationalAvar,
};
pub use rng::RngStream;
pub use rsa::{
    bounds, compute_thetas, constants_portfolio, constants_risk_program, run_rsa, MomentBounds,
    RiskProgramBounds, RsaConstants, RsaRun, RsaSetup, Thetas,
};
pub use saa::{asymptotic_ci, default_tol, solve_saa, variance_estimate, SolveReport};
pub use samplers::{
    bernoulli_vector_sample, truncnorm_cdf, truncnorm_sample, BernoulliVectorSpec, SampleMatrix,
    TruncNormalSpec,
};
