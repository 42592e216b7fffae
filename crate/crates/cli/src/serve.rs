//! Read-only HTTP endpoints for the topic explorer.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use parlascope::vis::VisData;
use serde::Serialize;
use tower_http::services::ServeDir;

#[derive(Clone)]
struct AppState {
    models: Arc<PathBuf>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct ModelEntry {
    pub id: String,
    pub k: usize,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.')) && !id.starts_with('.')
}

/// Every `<id>.json` in `dir` that parses as VisData, sorted by id.
pub fn list_models(dir: &Path) -> std::io::Result<Vec<ModelEntry>> {
    let mut entries = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        if let Ok(data) = VisData::read(&path) {
            entries.push(ModelEntry { id: id.to_string(), k: data.k });
        }
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(entries)
}

async fn model_index(State(state): State<AppState>) -> Response {
    match list_models(&state.models) {
        Ok(list) => Json(list).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn visdata(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Response {
    if !valid_id(&id) {
        return (StatusCode::BAD_REQUEST, "invalid model id").into_response();
    }
    let path = state.models.join(format!("{id}.json"));
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            if serde_json::from_slice::<VisData>(&bytes).is_err() {
                return (StatusCode::INTERNAL_SERVER_ERROR, "stored payload is not valid VisData").into_response();
            }
            ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
        }
        Err(_) => (StatusCode::NOT_FOUND, format!("no model {id}")).into_response(),
    }
}

pub fn router(models: PathBuf, assets: Option<PathBuf>) -> Router {
    let state = AppState { models: Arc::new(models) };
    let api = Router::new()
        .route("/api/models", get(model_index))
        .route("/api/visdata/{id}", get(visdata))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub fn run(addr: &str, models: PathBuf, assets: Option<PathBuf>) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("serving on http://{}", listener.local_addr()?);
        axum::serve(listener, router(models, assets)).await.context("server failed")
    })
}
