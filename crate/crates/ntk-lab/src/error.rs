//! Crate-wide error type and exit-code mapping.

/// Unified error type for the whole crate.
///
/// The CLI maps every variant to an exit code: configuration and data-plumbing
/// problems exit with 2, numerical failures with 3 (see [`Error::exit_code`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Scalar kernel input outside `[-1, 1]` beyond the clamp tolerance, or a
    /// point that violates its domain convention (e.g. off-sphere).
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched vector/matrix dimensions.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    /// Matrix handed to the eigensolver is not symmetric within tolerance.
    #[error("matrix not symmetric: max |G - G^T| entry = {max_abs:.3e} (tolerance {tol:.1e})")]
    Asymmetry { max_abs: f64, tol: f64 },

    /// Iterative eigensolver failed to converge within its iteration budget.
    #[error("eigendecomposition failed to converge (order {order})")]
    Convergence { order: usize },

    /// Too few usable points for a log-log fit.
    #[error("fit range degenerate: {usable} usable points, need at least {needed}")]
    Range { needed: usize, usable: usize },

    /// Cholesky factorization failed even at the maximum jitter level.
    #[error("covariance factorization failed at maximum jitter {max_jitter:.3e}")]
    Factorization { max_jitter: f64 },

    /// Too few Monte Carlo trajectories for a verdict.
    #[error("insufficient trials: got {got}, need at least {needed}")]
    InsufficientTrials { needed: usize, got: usize },

    /// Empty time grid or evaluation grid.
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    /// Operation requires the other initialization mode.
    #[error("initialization-mode mismatch: {0}")]
    Mode(String),

    /// Training loss blew past the instability threshold.
    #[error("training diverged at step {step}: loss {loss:.3e} exceeds 1e6 x initial loss")]
    Divergence { step: usize, loss: f64 },

    /// CSV cell failed to parse; location is 1-based.
    #[error("parse error in {path} at row {row}, column {col}: {msg}")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        msg: String,
    },

    /// Dataset ended up with zero rows.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// A feature row with zero norm cannot be projected to the unit sphere.
    #[error("zero-norm feature row {row} cannot be normalized to the unit sphere")]
    ZeroNormRow { row: usize },

    /// Invalid configuration (CLI flags, config file contents, combinations).
    #[error("config error: {0}")]
    Config(String),

    /// Malformed checkpoint file.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// An experiment cell failed; carries which cell and the underlying
    /// error (whose exit code is preserved).
    #[error("in cell ({cell}): {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code for this error: 2 for configuration/data errors, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Cell { source, .. } => source.exit_code(),
            Error::Domain(_)
            | Error::Asymmetry { .. }
            | Error::Convergence { .. }
            | Error::Range { .. }
            | Error::Factorization { .. }
            | Error::Divergence { .. } => 3,
            Error::Dimension { .. }
            | Error::InsufficientTrials { .. }
            | Error::EmptyGrid(_)
            | Error::Mode(_)
            | Error::Parse { .. }
            | Error::EmptyDataset(_)
            | Error::ZeroNormRow { .. }
            | Error::Config(_)
            | Error::Checkpoint(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
        }
    }

    /// Wraps the error with experiment-cell context, preserving the exit
    /// code of the underlying failure.
    pub fn in_cell(self, cell: impl Into<String>) -> Error {
        Error::Cell {
            cell: cell.into(),
            source: Box::new(self),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
