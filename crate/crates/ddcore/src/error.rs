//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("linear system is inconsistent (relative residual {residual:.3e})")]
    Inconsistent { residual: f64 },
    #[error("polynomial has no roots (degree zero)")]
    EmptyRootSet,
    #[error("matrix is not Schur stable (spectral radius {rho})")]
    Unstable { rho: f64 },
    #[error("pole-zero cancellation is ambiguous: {0}")]
    ReductionAmbiguous(String),
    #[error("realization is not stabilizable (PBH margin {margin:.3e} at |lambda|={modulus:.6})")]
    NotStabilizable { margin: f64, modulus: f64 },
    #[error("iteration did not converge within {0} steps")]
    NoConvergence(usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("latent factorization failed (residual {residual:.3e} > tol {tol:.3e})")]
    FactorizationFailed { residual: f64, tol: f64 },
    #[error("ambiguous root match: {0}")]
    AmbiguousMatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}
