use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {0} lies outside the unit interval")]
    Domain(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("knot vectors are not nested: {0}")]
    NotNested(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("point ({0}, {1}) is not inside any patch")]
    Lookup(f64, f64),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("shift {0} is too close to an eigenvalue, choose a different shift")]
    Shift(f64),
    #[error("time step is unstable: {0}")]
    Cfl(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
