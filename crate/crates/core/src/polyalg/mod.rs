//! Polynomial and rational-function algebra in the complex frequency `s`.
//!
//! Coefficients are stored in ascending powers of `s`. Two coefficient
//! fields are supported through [`Coeff`]: plain `f64` for numerics, and
//! [`Exact`] (arbitrary-precision rationals) for the network and feedback
//! models. Every `f64` is a dyadic rational, so parameters enter the exact
//! field without rounding and model transfer functions can be compared
//! coefficient by coefficient.

mod matching;
mod poly;
mod rational;
mod roots;

pub use matching::{min_displacement_assignment, partial_assignment, total_displacement};
pub use poly::{Coeff, Exact, Polynomial};
pub use rational::{rational_close, RationalFunction};
pub use roots::{quadratic_roots, roots, ComplexRootSet};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("no roots defined")]
    NoRoots,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("degenerate feedback")]
    DegenerateFeedback,
    #[error("pole evaluation")]
    PoleEvaluation,
    #[error("non-finite coefficient")]
    NonFinite,
    #[error("root extraction did not converge (residual {0:.3e})")]
    NotConverged(f64),
}
