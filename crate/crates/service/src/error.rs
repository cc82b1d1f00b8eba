use ai_lab_core::Error as CoreError;
use serde_json::{json, Value};
use thiserror::Error;

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("role `{role}` does not take part in {activity} sessions")]
    UnknownRole { role: String, activity: String },
    #[error("unsupported activity: {0}")]
    UnsupportedActivity(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("illegal action: {0}")]
    IllegalAction(String),
    #[error("stale session: action expected index {expected}, log is at {actual}")]
    StaleSession { expected: u64, actual: u64 },
    #[error("corrupt log: {0}")]
    CorruptLog(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(CoreError),
}

impl From<CoreError> for ServiceError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::IllegalMove(m) => ServiceError::IllegalAction(m),
            other => ServiceError::Core(other),
        }
    }
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownRole { .. } => "unknown_role",
            ServiceError::UnsupportedActivity(_) => "unsupported_activity",
            ServiceError::Validation(_) => "validation_error",
            ServiceError::IllegalAction(_) => "illegal_action",
            ServiceError::StaleSession { .. } => "stale_session",
            ServiceError::CorruptLog(_) => "corrupt_log",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Io(_) => "io_error",
            ServiceError::Core(e) => e.code(),
        }
    }

    /// HTTP status for the error body.
    pub fn status(&self) -> u16 {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::NotFound(_) => 404,
            ServiceError::UnknownRole { .. }
            | ServiceError::UnsupportedActivity(_)
            | ServiceError::Validation(_) => 400,
            ServiceError::IllegalAction(_) => 422,
            ServiceError::StaleSession { .. } => 409,
            ServiceError::CorruptLog(_) | ServiceError::Io(_) => 500,
            ServiceError::Core(e) => match e {
                CoreError::GameOver(_) => 409,
                CoreError::Io(_) => 500,
                CoreError::Syntax { .. }
                | CoreError::Validation(_)
                | CoreError::UnknownReference(_)
                | CoreError::InvalidGraph(_)
                | CoreError::InvalidDeck(_)
                | CoreError::InvalidGrid(_)
                | CoreError::MissingHeuristic(_) => 400,
                _ => 422,
            },
        }
    }

    pub fn detail(&self) -> Value {
        match self {
            ServiceError::UnknownRole { role, activity } => {
                json!({"role": role, "activity": activity})
            }
            ServiceError::StaleSession { expected, actual } => {
                json!({"expected_index": expected, "index": actual})
            }
            ServiceError::Core(CoreError::Syntax { line, column, .. }) => {
                json!({"line": line, "column": column})
            }
            _ => Value::Null,
        }
    }

    /// The `{code, message, detail}` body sent to clients.
    pub fn to_json(&self) -> Value {
        json!({"code": self.code(), "message": self.to_string(), "detail": self.detail()})
    }
}
