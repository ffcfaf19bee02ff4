//! Transform decay and normality toolkit for coin-tossing type measures.
//!
//! The measure under study is the distribution of the random binary
//! expansion `sum X_n 2^-n`, where the independent digits satisfy
//! `P(X_n = 0) = (1 + phi(n))/2` for a weight function `phi` decreasing
//! inside `(0, 1)`. The crate provides:
//!
//! - [`weights`]: the weight-function DSL, evaluation, and classification;
//! - [`transform`]: exact argument reduction and truncated product
//!   evaluation of the transform with rigorous tail bounds;
//! - [`decay`]: explicit decay-envelope constants, the binary block
//!   decomposition behind them, verification sweeps, and parallel scans;
//! - [`normality`]: point sampling, certified base conversion, digit-block
//!   statistics, exponential-sum and discrepancy diagnostics;
//! - [`cli`]: the `cointoss` command-line front end.

#![forbid(unsafe_code)]

pub mod cli;
pub mod decay;
pub mod error;
pub mod normality;
pub mod rational;
pub mod report;
pub mod rng;
pub mod transform;
pub mod weights;

pub use error::{Error, Result};
pub use rational::RationalArgument;
pub use weights::{CaseTag, SingularityClass, WeightSpec};
