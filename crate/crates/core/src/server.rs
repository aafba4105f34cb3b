//! JSON over HTTP.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/artworks` | | catalog entries |
//! | GET | `/artworks/{id}` | | full record with provenance |
//! | GET | `/agent/state` | | urges, activation, resolution level, label |
//! | POST | `/ratings` | `{artwork_id, rating, rater}` | updated agent state |
//! | POST | `/sessions` | `{input_ref, seed}` | `{artwork_id, status}` |
//! | GET | `/images/{file}` | | stored PNG |
//!
//! `input_ref` is `"use_sample"` (the default) or a path relative to the
//! store root. Errors come back as `{"error": ...}` with 400 for bad input,
//! 403 in read-only mode, 404 for unknown ids and 409 while a session runs.

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::creative::ArtworkStatus;
use crate::engine::{Engine, InputSource};
use crate::error::Error;
use crate::store::Store;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServeConfig {
    pub bind: String,
    pub port: u16,
    pub store: PathBuf,
    pub read_only: bool,
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::InvalidInput(_) | Error::Decode(_) => StatusCode::BAD_REQUEST,
        Error::NotFound(_) => StatusCode::NOT_FOUND,
        Error::SessionBusy => StatusCode::CONFLICT,
        Error::ReadOnly => StatusCode::FORBIDDEN,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (status_for(&self.0), Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Debug, Deserialize)]
pub struct RatingRequest {
    pub artwork_id: String,
    pub rating: i64,
    pub rater: String,
}

#[derive(Debug, Deserialize)]
pub struct SessionRequest {
    #[serde(default)]
    pub input_ref: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionReply {
    pub artwork_id: String,
    pub status: ArtworkStatus,
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/artworks", get(list_artworks))
        .route("/artworks/{id}", get(get_artwork))
        .route("/agent/state", get(agent_state))
        .route("/ratings", post(post_rating))
        .route("/sessions", post(post_session))
        .route("/images/{file}", get(get_image))
        .with_state(engine)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> crate::Result<T> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(Error::InvalidState(format!("worker failed: {e}")))),
    }
}

async fn list_artworks(State(engine): State<Arc<Engine>>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || engine.catalog()).await?))
}

async fn get_artwork(State(engine): State<Arc<Engine>>, UrlPath(id): UrlPath<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || engine.artwork(&id)).await?))
}

async fn agent_state(State(engine): State<Arc<Engine>>) -> impl IntoResponse {
    Json(engine.status())
}

async fn post_rating(State(engine): State<Arc<Engine>>, Json(req): Json<RatingRequest>) -> ApiResult<impl IntoResponse> {
    let rating = u8::try_from(req.rating).map_err(|_| Error::InvalidInput(format!("rating {} outside 1..=5", req.rating)))?;
    Ok(Json(blocking(move || engine.rate(&req.artwork_id, rating, &req.rater)).await?))
}

fn resolve_input(root: &Path, input_ref: Option<&str>) -> crate::Result<InputSource> {
    match input_ref {
        None | Some("use_sample") => Ok(InputSource::Sample),
        Some(r) => {
            let p = Path::new(r);
            if !p.components().all(|c| matches!(c, Component::Normal(_))) {
                return Err(Error::InvalidInput("input_ref must be a relative path inside the store".into()));
            }
            Ok(InputSource::File(root.join(p)))
        }
    }
}

async fn post_session(State(engine): State<Arc<Engine>>, Json(req): Json<SessionRequest>) -> ApiResult<impl IntoResponse> {
    let input = resolve_input(engine.store().root(), req.input_ref.as_deref())?;
    let art = blocking(move || engine.create(&input, req.seed)).await?;
    Ok((StatusCode::CREATED, Json(SessionReply { artwork_id: art.record.id, status: art.record.status })))
}

async fn get_image(State(engine): State<Arc<Engine>>, UrlPath(file): UrlPath<String>) -> ApiResult<Response> {
    let ok = file.ends_with(".png") && file.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '.') && !file.starts_with('.');
    if !ok {
        return Err(Error::NotFound(file).into());
    }
    let path = engine.store().artworks_dir().join(&file);
    let bytes = blocking(move || {
        std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(file),
            _ => e.into(),
        })
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

impl ServeConfig {
    pub fn addr(&self) -> crate::Result<SocketAddr> {
        format!("{}:{}", self.bind, self.port).parse().map_err(|e| Error::InvalidInput(format!("bind address: {e}")))
    }

    pub fn open_engine(&self) -> crate::Result<Engine> {
        Engine::open(Store::open_existing(&self.store)?, self.read_only)
    }
}

/// Binds and serves until the process is stopped.
pub async fn serve(cfg: &ServeConfig) -> crate::Result<()> {
    let addr = cfg.addr()?;
    let engine = Arc::new(cfg.open_engine()?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(engine)).await?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_refs() {
        let root = Path::new("/s");
        assert_eq!(resolve_input(root, None).unwrap(), InputSource::Sample);
        assert_eq!(resolve_input(root, Some("use_sample")).unwrap(), InputSource::Sample);
        assert_eq!(resolve_input(root, Some("in/a.png")).unwrap(), InputSource::File(PathBuf::from("/s/in/a.png")));
        assert!(resolve_input(root, Some("../a.png")).is_err());
        assert!(resolve_input(root, Some("/etc/passwd")).is_err());
    }

    #[test]
    fn error_statuses() {
        assert_eq!(status_for(&Error::SessionBusy), StatusCode::CONFLICT);
        assert_eq!(status_for(&Error::ReadOnly), StatusCode::FORBIDDEN);
        assert_eq!(status_for(&Error::NotFound("x".into())), StatusCode::NOT_FOUND);
        assert_eq!(status_for(&Error::InvalidInput("x".into())), StatusCode::BAD_REQUEST);
    }
}
