//! Weighted two-variable means, the inequalities between them, and their
//! operator counterparts on symmetric positive definite matrices.
//!
//! Scalar code is generic over [`Real`], implemented for `f32`, `f64` and the
//! arbitrary-precision [`BigFloat`]. Inequalities live in [`catalog`] as
//! signed gap functions; [`explorer`] searches them for counterexamples and
//! [`report`] turns results into reproducible JSON or CSV.
//!
//! ```
//! use meanlab::{ScalarPairF64, WeightSplitF64};
//! use meanlab::means::weighted_log_mean;
//!
//! let pair = ScalarPairF64::new(2.0, 1.0).unwrap();
//! let l = weighted_log_mean(&pair, &WeightSplitF64::half());
//! assert!((l - 1.0 / 2f64.ln()).abs() < 1e-15);
//! ```

pub mod catalog;
pub mod error;
pub mod explorer;
pub mod means;
pub mod operator;
pub mod quadrature;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{BigFloat, Real};

pub type ScalarPairF64 = means::ScalarPair<f64>;
pub type ScalarPairF32 = means::ScalarPair<f32>;
pub type ScalarPairBig = means::ScalarPair<BigFloat>;
pub type WeightSplitF64 = means::WeightSplit<f64>;
pub type WeightSplitF32 = means::WeightSplit<f32>;
pub type WeightSplitBig = means::WeightSplit<BigFloat>;
pub type SpdMatrixF64 = operator::SpdMatrix<f64>;
pub type SpdMatrixF32 = operator::SpdMatrix<f32>;
