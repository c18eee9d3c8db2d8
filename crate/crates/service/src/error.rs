use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::Serialize;
use serde_json::{json, Value};
use sla_core::chat::Diagnostic;
use sla_core::index::IndexError;
use sla_core::media::{LoopError, MediaError};
use sla_core::report::ReportError;
use sla_store::StoreError;

/// The one error shape the API returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub details: Option<Value>,
}

#[derive(Serialize)]
struct Body<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<&'a Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.to_string(), message: message.into(), details: None }
    }

    pub fn with_details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).ok();
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "INVALID_REQUEST", message)
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NOT_FOUND", format!("{} not found", what.into()))
    }

    /// A transcript rule broken; the code is the diagnostic's own.
    pub fn diagnostic(d: Diagnostic) -> Self {
        let code = d.code.to_string();
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, &code, d.message.clone()).with_details(vec![d])
    }

    pub fn diagnostics(diags: Vec<Diagnostic>) -> Self {
        match diags.first() {
            Some(first) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, &first.code.to_string(), first.message.clone())
                .with_details(diags),
            None => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_TRANSCRIPT", "transcript rejected"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body { code: &self.code, message: &self.message, details: self.details.as_ref() };
        (self.status, axum::Json(json!(body))).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound(what) => ApiError::not_found(what),
            StoreError::Conflict { .. } => ApiError::new(StatusCode::CONFLICT, "CONFLICT", message),
            StoreError::InvalidTranscript(diags) => ApiError::diagnostics(diags),
            StoreError::Invalid { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_DOCUMENT", message),
            StoreError::MissingField(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "MISSING_FIELD", message),
            StoreError::Unsupported(_) => ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "UNSUPPORTED", message),
            StoreError::Media(m) => m.into(),
            StoreError::Index(i) => i.into(),
            StoreError::AlreadyInitialized(_) | StoreError::NotInitialized(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "STORE_UNAVAILABLE", message)
            }
            StoreError::Interrupted { .. } | StoreError::Io(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "STORAGE", message),
        }
    }
}

impl From<MediaError> for ApiError {
    fn from(e: MediaError) -> Self {
        let message = e.to_string();
        match e {
            MediaError::Unsupported(_) | MediaError::Truncated(_) | MediaError::Empty => {
                ApiError::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "UNSUPPORTED_MEDIA", message)
            }
            MediaError::UnknownLevel { .. } | MediaError::SpanOutOfBounds { .. } | MediaError::InvalidBucket(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "MEDIA_RANGE", message)
            }
            MediaError::Sidecar(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "SIDECAR", message),
        }
    }
}

impl From<LoopError> for ApiError {
    fn from(e: LoopError) -> Self {
        let message = e.to_string();
        match e {
            LoopError::AtEnd(state) => ApiError::new(StatusCode::CONFLICT, "LOOP_AT_END", message).with_details(state),
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "LOOP_INVALID", message),
        }
    }
}

impl From<IndexError> for ApiError {
    fn from(e: IndexError) -> Self {
        let message = e.to_string();
        match e {
            IndexError::InvalidSelection(v) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_SELECTION", message).with_details(v),
            IndexError::UnknownSystem(_) | IndexError::UnknownOption { .. } | IndexError::EmptySelection | IndexError::VersionMismatch { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_SELECTION", message)
            }
            IndexError::SpanOutOfRange { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "SPAN_OUT_OF_RANGE", message),
            IndexError::BoundExceeded { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "BOUND_EXCEEDED", message),
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "INVALID_NETWORK", message),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "REPORT_INPUT", e.to_string())
    }
}

impl From<Diagnostic> for ApiError {
    fn from(d: Diagnostic) -> Self {
        ApiError::diagnostic(d)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(r: PathRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<tokio::task::JoinError> for ApiError {
    fn from(e: tokio::task::JoinError) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", e.to_string())
    }
}
