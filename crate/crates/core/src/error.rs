use thiserror::Error;

use crate::means::MeanKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must lie in [{lo}, {hi}], got {value}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("unknown inequality case `{0}`")]
    UnknownCase(String),

    #[error("point outside the domain of `{case}`: {reason}")]
    DomainViolation { case: String, reason: String },

    #[error("case `{case}` needs parameter `{param}`")]
    MissingParameter { case: String, param: &'static str },

    #[error("{0:?} cannot be used in a nested mean")]
    UnsupportedKind(MeanKind),

    #[error("empty grid: {0}")]
    EmptyGrid(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("eigendecomposition failed to reconstruct the matrix (residual {residual:e})")]
    Reconstruction { residual: f64 },

    #[error("precondition of `{case}` violated: {condition}")]
    PreconditionViolated { case: String, condition: String },

    #[error("quadrature rule needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("this probe requires precision escalation to be enabled")]
    EscalationDisabled,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    Parse(String),
}
