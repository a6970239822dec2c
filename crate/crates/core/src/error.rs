use thiserror::Error;

pub type Result<T> = std::result::Result<T, SmmError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmmError {
    /// Cholesky pivot fell below `1e-10 * max diagonal`.
    #[error("{what} is not positive definite (pivot {pivot:.3e} at index {index})")]
    NotPositiveDefinite {
        what: String,
        index: usize,
        pivot: f64,
    },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate market: {0}")]
    DegenerateMarket(String),

    #[error("invalid market: {0}")]
    InvalidMarket(String),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("singular constraint system{}: {reason}", constraint.map(|j| format!(" (constraint {j})")).unwrap_or_default())]
    SingularConstraintSystem {
        constraint: Option<usize>,
        reason: String,
    },

    #[error("singular basis: {0}")]
    SingularBasis(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("no kernel mass at grid point {0}")]
    EmptyWindow(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl SmmError {
    /// True for failures of the numerics on well-formed input, as opposed to
    /// malformed or out-of-range input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SmmError::NotPositiveDefinite { .. }
                | SmmError::SingularConstraintSystem { .. }
                | SmmError::SingularBasis(_)
                | SmmError::DegenerateMarket(_)
                | SmmError::EmptyWindow(_)
                | SmmError::Internal(_)
        )
    }

    /// Prefix the subject of a factorization failure, e.g. with a state index.
    pub fn context(self, prefix: &str) -> Self {
        match self {
            SmmError::NotPositiveDefinite { what, index, pivot } => {
                SmmError::NotPositiveDefinite {
                    what: format!("{prefix}: {what}"),
                    index,
                    pivot,
                }
            }
            SmmError::DimensionMismatch {
                what,
                expected,
                found,
            } => SmmError::DimensionMismatch {
                what: format!("{prefix}: {what}"),
                expected,
                found,
            },
            SmmError::InvalidInput(msg) => SmmError::InvalidInput(format!("{prefix}: {msg}")),
            other => other,
        }
    }
}
