use thiserror::Error;

/// Errors raised by the width, geometry and manifold routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point (t = {t}, x = {x}) lies outside the closed domain [0, 1] x [-1, 1]")]
    OutsideDomain { t: f64, x: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("snapshots from different families cannot be combined")]
    IncompatibleFamilies,

    #[error("empty snapshot set")]
    Empty,

    #[error("matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (indicator {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("basis is not orthonormal against the Gram matrix (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("dimension {requested} exceeds the numerical rank {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("test function support is not strictly inside the space-time domain")]
    SupportNotInterior,

    #[error("quadrature order {0} is below the minimum of 8")]
    QuadratureOrder(usize),

    #[error("decay fit needs at least 4 points, got {0}")]
    InsufficientData(usize),

    #[error("non-positive error {value:e} at N = {n}")]
    NonPositiveError { n: f64, value: f64 },

    #[error("grid of size {grid} cannot serve N = {n}: {reason}")]
    InfeasibleGrid {
        grid: usize,
        n: usize,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::IndexOutOfRange { .. }
                | Error::InvalidConfig(_)
                | Error::InfeasibleGrid { .. }
                | Error::QuadratureOrder(_)
                | Error::SupportNotInterior
                | Error::OutsideDomain { .. }
                | Error::Empty
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
