use thiserror::Error;

use crate::energy::NehariClass;

pub type Result<T> = std::result::Result<T, NehariError>;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum NehariError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh mismatch: expected {expected} nodes, found {found}")]
    MeshMismatch { expected: usize, found: usize },

    #[error("field is not a Dirichlet field: boundary node {node} holds {value}")]
    NotDirichlet { node: usize, value: f64 },

    #[error("unknown weight preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("the zero pair is excluded")]
    ZeroPair,

    #[error("pair is not on the Nehari manifold (relative constraint residual {residual:e})")]
    NotOnManifold { residual: f64 },

    #[error("fibering parameter must be positive, got {0}")]
    NonpositiveT(f64),

    #[error("no scaling places the pair on the {0} branch")]
    NoScaling(NehariClass),

    #[error("invalid embedding constant: {0}")]
    InvalidConstant(String),

    #[error("no convergence in {context} after {iterations} iterations")]
    NonConvergence { context: String, iterations: usize },

    #[error("no seed admits the {branch} branch after {attempts} attempts")]
    BranchInfeasible { branch: NehariClass, attempts: usize },

    #[error("the two branch solutions coincide (relative L2 distance {distance:e})")]
    DistinctnessFailure { distance: f64 },

    #[error("field csv: {0}")]
    FieldFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NehariError {
    /// Whether the error is a numerical failure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            NehariError::NonConvergence { .. }
                | NehariError::DistinctnessFailure { .. }
                | NehariError::BranchInfeasible { .. }
                | NehariError::NoScaling(_)
        )
    }
}

impl From<csv::Error> for NehariError {
    fn from(err: csv::Error) -> Self {
        NehariError::FieldFormat(err.to_string())
    }
}
