use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

use chemsearch_core::querylang::QueryError;
use chemsearch_core::search::SearchError;

use crate::API_VERSION;

/// Machine-readable error code. Names are part of the wire format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorCode {
    EmptyQuery,
    InvalidSmiles,
    WrongSeparatorCount,
    InvalidParameter,
    UnknownDocument,
    UnknownPassage,
    NotFound,
    Internal,
}

#[derive(Debug, Clone, Error, Serialize)]
#[error("{message}")]
pub struct ApiError {
    #[serde(serialize_with = "status_code")]
    pub status: StatusCode,
    pub code: ErrorCode,
    pub message: String,
    /// The query component that failed to parse, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    /// Parser failure kind, e.g. `UnclosedRing`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<&'static str>,
}

fn status_code<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

impl ApiError {
    pub fn new(status: StatusCode, code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            component: None,
            reason: None,
        }
    }

    pub fn bad_request(code: ErrorCode, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, ErrorCode::Internal, message)
    }

    fn with_component(mut self, component: &str, reason: &'static str) -> Self {
        self.component = Some(component.to_string());
        self.reason = Some(reason);
        self
    }

    /// True for client mistakes (4xx).
    pub fn is_client_error(&self) -> bool {
        self.status.is_client_error()
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let message = e.to_string();
        match &e {
            QueryError::EmptyQuery => ApiError::bad_request(ErrorCode::EmptyQuery, message),
            QueryError::WrongSeparatorCount { .. } => {
                ApiError::bad_request(ErrorCode::WrongSeparatorCount, message)
            }
            QueryError::ComponentParseError { component, source, .. }
            | QueryError::InvalidSmiles { component, source, .. } => {
                ApiError::bad_request(ErrorCode::InvalidSmiles, message).with_component(component, source.kind())
            }
            QueryError::InvalidK => ApiError::bad_request(ErrorCode::InvalidParameter, message),
        }
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> Self {
        let message = e.to_string();
        match e {
            SearchError::Query(q) => q.into(),
            SearchError::InvalidSmiles { smiles, source } => {
                ApiError::bad_request(ErrorCode::InvalidSmiles, message).with_component(&smiles, source.kind())
            }
            SearchError::UnknownDocument(_) => {
                ApiError::new(StatusCode::NOT_FOUND, ErrorCode::UnknownDocument, message)
            }
            SearchError::UnknownPassage(_) => {
                ApiError::new(StatusCode::NOT_FOUND, ErrorCode::UnknownPassage, message)
            }
            SearchError::NothingToIndex | SearchError::InconsistentIndex(_) => ApiError::internal(message),
        }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    api_version: u32,
    error: &'a ApiError,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            api_version: API_VERSION,
            error: &self,
        };
        (self.status, Json(body)).into_response()
    }
}
