//! Crate-wide error type.

use alloc::vec::Vec;
use core::fmt;

/// Errors reported by state constructors, solvers and oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    Domain(&'static str),
    /// A state vector violates its invariants (ordering, mass budget, size).
    InvalidState(&'static str),
    /// Coincident positions or a degenerate cell make the internal energy
    /// infinite.
    InfiniteEnergy,
    /// NaN encountered in an input sequence.
    NaN,
    /// A matrix expected to be SPD has a nonpositive Cholesky pivot.
    NotPositiveDefinite,
    /// Projection onto fixed masses with a zero-mass cell (singular system).
    SingularMass,
    /// The λ-iteration for the trust-region subproblem did not converge.
    SubproblemIterations,
    /// The outer trust-region loop hit its iteration budget. Carries the
    /// best iterate found so far.
    Convergence { best: Vec<f64>, iterations: usize },
    /// Riemann data whose solution is not a shock/shock or (left)
    /// rarefaction / (right) shock pattern.
    UnsupportedPattern,
    /// An exact Riemann profile was queried past its pre-interaction
    /// validity horizon.
    OutOfHorizon { t: f64, t_max: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidState(what) => write!(f, "invalid state: {what}"),
            Error::InfiniteEnergy => write!(f, "infinite internal energy (degenerate interval)"),
            Error::NaN => write!(f, "NaN in input"),
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::SingularMass => write!(f, "zero-mass cell makes the projection singular"),
            Error::SubproblemIterations => {
                write!(f, "trust-region subproblem exceeded its iteration budget")
            }
            Error::Convergence { iterations, .. } => {
                write!(f, "trust-region solver did not converge in {iterations} iterations")
            }
            Error::UnsupportedPattern => write!(f, "unsupported Riemann wave pattern"),
            Error::OutOfHorizon { t, t_max } => {
                write!(f, "t = {t} is past the solution validity horizon {t_max}")
            }
        }
    }
}

impl core::error::Error for Error {}
