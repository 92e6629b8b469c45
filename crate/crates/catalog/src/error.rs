use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorCode {
    NotFound,
    BadRequest,
    Conflict,
    ParseFailure,
    Internal,
}

impl ErrorCode {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::NotFound => 404,
            ErrorCode::BadRequest => 400,
            ErrorCode::Conflict => 409,
            ErrorCode::ParseFailure => 422,
            ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{0}")]
    NotFound(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Conflict(String),
    #[error("{message}")]
    Parse { message: String, offset: Option<usize> },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Corrupt(String),
    /// Raised by the crash-injection hook; the catalog is left as a real
    /// crash would leave it.
    #[error("simulated crash at {0:?}")]
    SimulatedCrash(crate::store::CrashPoint),
}

impl CatalogError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CatalogError::Io { context: context.into(), source }
    }

    pub fn code(&self) -> ErrorCode {
        match self {
            CatalogError::NotFound(_) => ErrorCode::NotFound,
            CatalogError::BadRequest(_) => ErrorCode::BadRequest,
            CatalogError::Conflict(_) => ErrorCode::Conflict,
            CatalogError::Parse { .. } => ErrorCode::ParseFailure,
            CatalogError::Io { .. } | CatalogError::Corrupt(_) | CatalogError::SimulatedCrash(_) => ErrorCode::Internal,
        }
    }

    pub fn to_api_error(&self) -> ApiError {
        let detail = match self {
            CatalogError::Parse { offset: Some(offset), .. } => Some(serde_json::json!({ "byteOffset": offset })),
            _ => None,
        };
        ApiError { code: self.code(), message: self.to_string(), detail }
    }
}

pub type Result<T, E = CatalogError> = std::result::Result<T, E>;

/// Body of every non-success HTTP response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}
