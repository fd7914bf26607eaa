use thiserror::Error;

/// Errors raised by the decompositions, sketches and solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("invalid parameter for {op}: {detail}")]
    InvalidParameter { op: &'static str, detail: String },

    #[error("matrix has numerical rank zero")]
    ZeroRank,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("degenerate input for {op}: {detail}")]
    Degenerate { op: &'static str, detail: String },

    #[error("singular system in {op}: {detail}")]
    Singular { op: &'static str, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(op: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn degenerate(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Degenerate {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn singular(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Singular {
            op,
            detail: detail.into(),
        }
    }
}

/// Non-fatal conditions an algorithm recovered from. A result carrying any
/// warning is reported as "flagged" by the command-line harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A sketched or sampled block had lower numerical rank than expected and
    /// was inverted with a tolerance-based pseudo-inverse.
    RankDeficient {
        context: &'static str,
        rank: usize,
        expected: usize,
    },
    /// An iterative solver exhausted its iteration budget.
    NotConverged {
        iterations: usize,
        relative_residual: f64,
    },
    /// A Krylov block lost rank and was narrowed.
    KrylovCollapse { block: usize, width: usize },
    /// Retained eigenvalues were fewer than requested.
    RankReduced { requested: usize, retained: usize },
    /// A singular preconditioner or factor forced a redraw with a derived seed.
    Resampled { context: &'static str },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::RankDeficient {
                context,
                rank,
                expected,
            } => write!(f, "{context}: numerical rank {rank} < {expected}"),
            Warning::NotConverged {
                iterations,
                relative_residual,
            } => write!(
                f,
                "not converged after {iterations} iterations (relative residual {relative_residual:.3e})"
            ),
            Warning::KrylovCollapse { block, width } => {
                write!(f, "Krylov block {block} narrowed to width {width}")
            }
            Warning::RankReduced {
                requested,
                retained,
            } => write!(f, "retained rank {retained} < requested {requested}"),
            Warning::Resampled { context } => write!(f, "{context}: redrawn with a derived seed"),
        }
    }
}
