use alloc::string::String;

/// Failures raised by constructors and numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("invalid automorphism: {0}")]
    InvalidAutomorphism(String),
    #[error("automorphism has no ribbon square root")]
    NoRibbonStructure,
    #[error("invalid conformal factor: {0}")]
    InvalidConformalFactor(String),
    #[error("operator must be invertible: {0}")]
    RequiresInvertible(String),
    #[error("σ-selfadjoint conjugate failed: {0}")]
    RibbonConstruction(String),
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("invalid connection: {0}")]
    InvalidConnection(String),
    #[error("invalid homotopy family: {0}")]
    InvalidFamily(String),
    #[error("not an idempotent (residual {0:.3e})")]
    NotIdempotent(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
