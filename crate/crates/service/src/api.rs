//! HTTP routes.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::services::ServeDir;

use chemsearch_core::par::Execution;
use chemsearch_core::search::Engine;
use chemsearch_core::snapshot::{self, SnapshotError};

use crate::error::{ApiError, ErrorCode};
use crate::views::{self, QueryParams};

/// The engine currently being served. Handlers clone the inner `Arc` once
/// per request, so a reload never changes the index under a running query.
#[derive(Clone)]
pub struct AppState {
    engine: Arc<RwLock<Arc<Engine>>>,
    snapshot_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        AppState {
            engine: Arc::new(RwLock::new(Arc::new(engine))),
            snapshot_path: None,
        }
    }

    pub fn from_snapshot(path: &Path, exec: Execution) -> Result<Self, SnapshotError> {
        let engine = snapshot::load(path, exec)?;
        Ok(AppState {
            snapshot_path: Some(path.to_path_buf()),
            ..AppState::new(engine)
        })
    }

    pub fn engine(&self) -> Arc<Engine> {
        self.engine.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, engine: Engine) {
        *self.engine.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(engine);
    }

    /// Reloads the snapshot file this state was created from. On failure
    /// the current engine stays in place.
    pub fn reload(&self) -> Result<(), SnapshotError> {
        let Some(path) = &self.snapshot_path else {
            return Ok(());
        };
        let exec = self.engine().execution();
        let engine = snapshot::load(path, exec)?;
        self.replace(engine);
        log::info!("reloaded snapshot {}", path.display());
        Ok(())
    }
}

#[derive(Debug, Default, Clone)]
pub struct StaticDirs {
    /// Built UI bundle, served at `/assets`.
    pub ui: Option<PathBuf>,
    /// Directory holding the documents' `source_path` files, served at
    /// `/assets/documents`.
    pub documents: Option<PathBuf>,
}

pub fn router(state: AppState, dirs: &StaticDirs) -> Router {
    let mut app = Router::new()
        .route("/api/search", get(search))
        .route("/api/stats", get(stats))
        .route("/api/documents/{doc_id}", get(document))
        .route("/api/documents/{doc_id}/reactions", get(reactions))
        .route("/api/passages/{passage_id}", get(passage))
        .fallback(not_found)
        .with_state(state);
    if let Some(dir) = &dirs.documents {
        app = app.nest_service("/assets/documents", ServeDir::new(dir));
    }
    if let Some(dir) = &dirs.ui {
        app = app.nest_service("/assets", ServeDir::new(dir));
    }
    app
}

/// Query-string form of the search parameters. `k` is taken as text so a
/// malformed value gets the regular error body.
#[derive(Debug, Deserialize)]
struct SearchParams {
    text: Option<String>,
    smiles: Option<String>,
    reaction_smarts: Option<String>,
    k: Option<String>,
}

fn parse_k(k: Option<&str>) -> Result<Option<usize>, ApiError> {
    match k.map(str::trim).filter(|k| !k.is_empty()) {
        None => Ok(None),
        Some(k) => k.parse().map(Some).map_err(|_| {
            ApiError::bad_request(
                ErrorCode::InvalidParameter,
                format!("k must be a positive integer, got '{k}'"),
            )
        }),
    }
}

async fn search(State(state): State<AppState>, Query(p): Query<SearchParams>) -> Result<Response, ApiError> {
    let params = QueryParams {
        k: parse_k(p.k.as_deref())?,
        text: p.text,
        smiles: p.smiles,
        reaction_smarts: p.reaction_smarts,
    };
    let engine = state.engine();
    let payload = tokio::task::spawn_blocking(move || views::run_search(&engine, params))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(payload).into_response())
}

async fn stats(State(state): State<AppState>) -> Response {
    Json(views::stats(&state.engine())).into_response()
}

async fn document(State(state): State<AppState>, UrlPath(doc_id): UrlPath<String>) -> Result<Response, ApiError> {
    Ok(Json(views::document(&state.engine(), &doc_id)?).into_response())
}

async fn reactions(State(state): State<AppState>, UrlPath(doc_id): UrlPath<String>) -> Result<Response, ApiError> {
    Ok(Json(views::reactions(&state.engine(), &doc_id)?).into_response())
}

async fn passage(State(state): State<AppState>, UrlPath(passage_id): UrlPath<String>) -> Result<Response, ApiError> {
    Ok(Json(views::passage(&state.engine(), &passage_id)?).into_response())
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, ErrorCode::NotFound, "no such route")
}
