//! Numerical verification of Parseval-type formulas for Ramanujan expansions.
//!
//! The crate sieves the classical arithmetic functions, evaluates Ramanujan
//! sums and truncated expansions, computes shifted correlation sums
//! `sum_{n <= N} f(n) g(n + h)` and compares them with the predicted main
//! terms, closed-form constants and error envelopes.

pub mod analysis;
pub mod arith;
pub mod cli;
pub mod closed_forms;
pub mod correlation;
mod error;
pub mod ramanujan;
mod sum;

pub use error::{Error, Result};
pub use sum::CompensatedSum;
