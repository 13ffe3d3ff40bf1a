use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use causeloom_core::hypergraph::AmendAction;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::render::{self, HistogramQuery, RenderError};
use crate::state::AmendError;
use crate::{AppState, GraphQuery, PropagationQuery, View};

#[derive(Debug)]
enum ApiError {
    NoSnapshot,
    BadRequest(String),
    NotFound(String),
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, error, detail) = match self {
            ApiError::NoSnapshot => (StatusCode::CONFLICT, "no_snapshot", "no snapshot is loaded".to_string()),
            ApiError::BadRequest(d) => (StatusCode::BAD_REQUEST, "bad_request", d),
            ApiError::NotFound(d) => (StatusCode::NOT_FOUND, "not_found", d),
            ApiError::Internal(d) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", d),
        };
        sorted_json(status, &json!({"error": error, "detail": detail}))
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::BadRequest(d) => ApiError::BadRequest(d),
            RenderError::NotFound(d) => ApiError::NotFound(d),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::BadRequest(e.body_text())
    }
}

/// Serializes through `Value`, whose maps keep keys sorted.
fn sorted_json(status: StatusCode, body: &Value) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body.to_string()).into_response()
}

type ApiResult = Result<Response, ApiError>;

fn ok(body: Value) -> ApiResult {
    Ok(sorted_json(StatusCode::OK, &body))
}

fn loaded(state: &AppState) -> Result<std::sync::Arc<View>, ApiError> {
    state.view().ok_or(ApiError::NoSnapshot)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/graph", get(graph))
        .route("/api/amendments", post(amend))
        .route("/api/propagation", get(propagation))
        .route("/api/histogram", get(histogram))
        .route("/api/communities", get(communities))
        .route("/api/orderings", get(orderings))
        .with_state(state)
}

async fn health(State(state): State<AppState>) -> ApiResult {
    let body = match state.view() {
        Some(v) => json!({
            "status": "ok",
            "snapshot": v.snapshot_digest,
            "journal_len": v.journal_len,
            "skipped_on_replay": v.skipped,
            "edges": v.amended.len(),
        }),
        None => json!({"status": "ok", "snapshot": null}),
    };
    ok(body)
}

async fn graph(State(state): State<AppState>, q: Result<Query<GraphQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q?;
    ok(render::graph(&*loaded(&state)?, &q)?)
}

async fn orderings(State(state): State<AppState>, q: Result<Query<GraphQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q?;
    ok(render::orderings(&*loaded(&state)?, &q)?)
}

async fn propagation(
    State(state): State<AppState>,
    q: Result<Query<PropagationQuery>, QueryRejection>,
) -> ApiResult {
    let Query(q) = q?;
    ok(render::propagation(&*loaded(&state)?, &q, state.propagation_paths())?)
}

async fn histogram(State(state): State<AppState>, q: Result<Query<HistogramQuery>, QueryRejection>) -> ApiResult {
    let Query(q) = q?;
    ok(render::histogram(&*loaded(&state)?, &q)?)
}

async fn communities(State(state): State<AppState>) -> ApiResult {
    ok(render::communities(&*loaded(&state)?))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmendBody {
    edge_id: String,
    action: String,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    author: String,
}

async fn amend(State(state): State<AppState>, body: Result<Json<AmendBody>, JsonRejection>) -> ApiResult {
    let Json(body) = body?;
    let action = AmendAction::parse(&body.action, body.value).map_err(|e| ApiError::BadRequest(e.to_string()))?;
    match state.amend(body.edge_id.clone(), action, body.author).await {
        Ok(seq) => ok(json!({"seq": seq, "edge_id": body.edge_id, "action": action.name()})),
        Err(AmendError::NoSnapshot) => Err(ApiError::NoSnapshot),
        Err(AmendError::UnknownEdge(id)) => Err(ApiError::NotFound(format!("unknown edge {id:?}"))),
        Err(AmendError::Io(e)) => {
            log::error!("journal write failed: {e}");
            Err(ApiError::Internal(e.to_string()))
        }
    }
}
