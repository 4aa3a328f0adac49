//! HTTP API and command-line front end for the chemsearch engine.

pub mod api;
pub mod error;
pub mod views;

pub use api::{router, AppState, StaticDirs};
pub use error::{ApiError, ErrorCode};

/// Version of the JSON response schemas.
pub const API_VERSION: u32 = 1;
