use alloc::string::String;

/// Errors raised by the core solvers and constructors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point cloud is empty")]
    EmptyPointCloud,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("degenerate bandwidth: all points coincide")]
    DegenerateBandwidth,
    #[error("row {0} of the affinity matrix has zero degree")]
    ZeroDegree(usize),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("marginal totals differ: {0} vs {1}")]
    MassMismatch(f64, f64),
    #[error("negative mass in {0}")]
    NegativeMass(&'static str),
    #[error("exact transport of size {rows}x{cols} exceeds the cap of {cap}; use sinkhorn instead")]
    SizeCap { rows: usize, cols: usize, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate complex: dimension {max_dim} needs more than {points} points")]
    DegenerateComplex { max_dim: usize, points: usize },
    #[error("linear solve failed: {0}")]
    SolverFailure(&'static str),
    #[error("coupling support is empty")]
    EmptySupport,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
}

pub type Result<T> = core::result::Result<T, Error>;
