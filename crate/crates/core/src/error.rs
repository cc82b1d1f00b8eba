use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the lab engines can report.
///
/// `code()` gives a stable snake_case identifier used by the CLI and the
/// session service when errors cross a process boundary.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown reference: {0}")]
    UnknownReference(String),
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("predicate references missing attribute `{attr}` on state `{state}`")]
    Predicate { state: String, attr: String },
    #[error("frontier is empty")]
    EmptyFrontier,
    #[error("discipline `{0}` requires a heuristic table")]
    MissingHeuristic(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("state `{0}` was never reached by the search")]
    UnreachedState(String),

    #[error("invalid deck: {0}")]
    InvalidDeck(String),
    #[error("value iteration did not converge within {sweeps} sweeps (residual {residual})")]
    NonConvergence { sweeps: usize, residual: f64 },
    #[error("undiscounted MDP contains a cycle through state `{0}`")]
    CyclicUndiscounted(String),
    #[error("no value for state `{0}`")]
    MissingValue(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("action {action} is not available at {cell}")]
    UnavailableAction { cell: String, action: String },
    #[error("no Q-table entry for {0}")]
    UnknownKey(String),
    #[error("Q-table has no row for cell {0}")]
    MissingRow(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("observation `{0}` has zero likelihood under the current belief")]
    ZeroLikelihood(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("game is over ({0})")]
    GameOver(String),
    #[error("particle weights are all zero")]
    Degeneracy,
    #[error("path enumeration too large: {0} paths")]
    TooLarge(u128),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "syntax_error",
            Error::Validation(_) => "validation_error",
            Error::UnknownReference(_) => "unknown_reference",
            Error::Domain(_) => "domain_error",
            Error::UnknownState(_) => "unknown_state",
            Error::Predicate { .. } => "predicate_error",
            Error::EmptyFrontier => "empty_frontier",
            Error::MissingHeuristic(_) => "missing_heuristic",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::UnreachedState(_) => "unreached_state",
            Error::InvalidDeck(_) => "invalid_deck",
            Error::NonConvergence { .. } => "non_convergence",
            Error::CyclicUndiscounted(_) => "cyclic_undiscounted",
            Error::MissingValue(_) => "missing_value",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::UnavailableAction { .. } => "unavailable_action",
            Error::UnknownKey(_) => "unknown_key",
            Error::MissingRow(_) => "missing_row",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::ZeroLikelihood(_) => "zero_likelihood",
            Error::IllegalMove(_) => "illegal_move",
            Error::GameOver(_) => "game_over",
            Error::Degeneracy => "degeneracy",
            Error::TooLarge(_) => "too_large",
            Error::Io(_) => "io_error",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
