//! HTTP front of the annotation store.
//!
//! | method | path | body / reply |
//! |---|---|---|
//! | GET | `/api/next?annotator=ID` | [`NextTask`] |
//! | POST | `/api/annotation` | [`AnnotationRecord`] → [`Ack`] |
//! | GET | `/api/stats` | [`Stats`] |
//! | GET | `/api/image/{item_id}` | PNG bytes |
//! | GET | `/api/export` | rating table, JSONL |
//!
//! Errors reply `{"error": {"kind", "message"}}` with status 400 for
//! validation failures, 404 for unknown items or annotators and 500 for
//! storage failures.

mod store;

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

pub use store::{
    Ack, AnnotationRecord, AnnotatorStats, Item, Mode, NextTask, PairRates, ServiceError, SkipReason, Stats, Store, StoreConfig, Task,
    AUDIT, JOURNAL,
};

pub type SharedStore = Arc<Mutex<Store>>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::Validation(_) => StatusCode::BAD_REQUEST,
            ServiceError::UnknownAnnotator(_) | ServiceError::UnknownItem(_) => StatusCode::NOT_FOUND,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } });
        (status, Json(body)).into_response()
    }
}

fn lock(store: &SharedStore) -> std::sync::MutexGuard<'_, Store> {
    store.lock().unwrap_or_else(|p| p.into_inner())
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: String,
}

async fn next(State(store): State<SharedStore>, Query(q): Query<NextQuery>) -> Result<Json<NextTask>, ServiceError> {
    Ok(Json(lock(&store).next_task(&q.annotator)?))
}

async fn annotate(State(store): State<SharedStore>, body: Bytes) -> Result<Json<Ack>, ServiceError> {
    let record: AnnotationRecord = serde_json::from_slice(&body).map_err(|e| ServiceError::Validation(e.to_string()))?;
    Ok(Json(lock(&store).submit(record)?))
}

async fn stats(State(store): State<SharedStore>) -> Json<Stats> {
    Json(lock(&store).stats())
}

async fn image(State(store): State<SharedStore>, Path(item_id): Path<String>) -> Result<Response, ServiceError> {
    let path = lock(&store).item(&item_id).map(|i| i.path.clone()).ok_or(ServiceError::UnknownItem(item_id))?;
    let bytes = tokio::fs::read(&path).await.map_err(|e| ServiceError::Storage(crate::Error::Io { path, source: e }))?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn export(State(store): State<SharedStore>) -> Response {
    let body = lock(&store).export_jsonl();
    ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/api/next", get(next))
        .route("/api/annotation", post(annotate))
        .route("/api/stats", get(stats))
        .route("/api/image/{item_id}", get(image))
        .route("/api/export", get(export))
        .with_state(store)
}

/// Serves until `shutdown` resolves.
pub async fn serve(store: Store, addr: SocketAddr, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("annotation service listening on {}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(Mutex::new(store)))).with_graceful_shutdown(shutdown).await
}
