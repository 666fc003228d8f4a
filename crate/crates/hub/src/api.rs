use std::path::PathBuf;
use std::sync::Arc;

use augvis_core::artifacts::render_preview;
use augvis_core::augment::compile;
use augvis_core::validator::validate_compiled;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

use crate::store::{check_spec, HubError, Store};

impl IntoResponse for HubError {
    fn into_response(self) -> Response {
        let status = match &self {
            HubError::InvalidSpec(_) => StatusCode::BAD_REQUEST,
            HubError::ValidationFailed(_) => StatusCode::CONFLICT,
            HubError::UnknownId(_) | HubError::UnknownVersion(_) => StatusCode::NOT_FOUND,
            HubError::NoArBlock => StatusCode::UNPROCESSABLE_ENTITY,
            HubError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(json!({"error": self.code(), "detail": self.detail()}))).into_response()
    }
}

#[derive(Deserialize)]
struct VersionQuery {
    v: Option<u64>,
}

#[derive(Deserialize)]
struct PublishQuery {
    #[serde(default)]
    force: bool,
}

type AppState = Arc<Store>;

fn svg(body: impl Into<String>) -> Response {
    ([(header::CONTENT_TYPE, "image/svg+xml")], body.into()).into_response()
}

fn publish_response(store: &Store, body: &str, target: Option<&str>, force: bool) -> Result<Response, HubError> {
    let p = store.publish(body, target, force)?;
    let status = if p.created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(p.receipt.to_json())).into_response())
}

async fn publish_new(State(s): State<AppState>, Query(q): Query<PublishQuery>, body: String) -> Result<Response, HubError> {
    publish_response(&s, &body, None, q.force)
}

async fn publish_version(
    State(s): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PublishQuery>,
    body: String,
) -> Result<Response, HubError> {
    publish_response(&s, &body, Some(&id), q.force)
}

async fn get_spec(State(s): State<AppState>, Path(id): Path<String>, Query(q): Query<VersionQuery>) -> Result<Response, HubError> {
    let bytes = s.spec_bytes(&id, q.v)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn get_virtual(State(s): State<AppState>, Path(id): Path<String>, Query(q): Query<VersionQuery>) -> Result<Response, HubError> {
    Ok(svg(s.virtual_layer(&id, q.v)?))
}

async fn get_reference(State(s): State<AppState>, Path(id): Path<String>, Query(q): Query<VersionQuery>) -> Result<Response, HubError> {
    let bytes = s.reference(&id, q.v)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], bytes).into_response())
}

async fn get_anchor(State(s): State<AppState>, Path(id): Path<String>, Query(q): Query<VersionQuery>) -> Result<Response, HubError> {
    let payload = s.anchor(&id, q.v)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], payload.to_canonical()).into_response())
}

fn compile_failure(e: impl std::fmt::Display) -> HubError {
    HubError::InvalidSpec(json!([{"code": "CompileError", "path": "", "message": e.to_string()}]))
}

async fn post_compile(body: String) -> Result<Response, HubError> {
    let spec = check_spec(&body)?;
    let compiled = compile(&spec).map_err(compile_failure)?;
    Ok(svg(render_preview(&compiled)))
}

async fn post_validate(body: String) -> Result<Response, HubError> {
    let spec = check_spec(&body)?;
    let compiled = compile(&spec).map_err(compile_failure)?;
    let report = validate_compiled(&spec, &compiled).map_err(compile_failure)?;
    Ok(Json(report.to_json()).into_response())
}

/// The hub's routes. With `ui` set, files under that directory are served
/// for any other path.
pub fn router(store: Store, ui: Option<PathBuf>) -> Router {
    let app = Router::new()
        .route("/specs", post(publish_new))
        .route("/specs/{id}", get(get_spec).post(publish_version))
        .route("/specs/{id}/virtual", get(get_virtual))
        .route("/specs/{id}/reference", get(get_reference))
        .route("/specs/{id}/anchor", get(get_anchor))
        .route("/compile", post(post_compile))
        .route("/validate", post(post_validate))
        .with_state(Arc::new(store));
    match ui {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serve on an already bound listener until the process ends.
pub async fn serve(listener: tokio::net::TcpListener, store: Store, ui: Option<PathBuf>) -> std::io::Result<()> {
    axum::serve(listener, router(store, ui)).await
}
