//! The guide's chapters, included as documentation so that `cargo test`
//! compiles and runs every code block in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/risk-measures.md")]
pub mod risk_measures {}
#[doc = include_str!("../../../book/src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("../../../book/src/saa.md")]
pub mod saa {}
#[doc = include_str!("../../../book/src/rsa.md")]
pub mod rsa {}
#[doc = include_str!("../../../book/src/tests.md")]
pub mod tests {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
