//! HTTP facade for the DataSlicer recommender.
//!
//! | Method | Path | Body | Response |
//! |---|---|---|---|
//! | POST | `/datasets` | multipart `schema` + `csv` | dataset summary |
//! | POST | `/datasets/{name}/evaluate` | `{spec}` | result table |
//! | GET | `/graphs` | | task list |
//! | POST | `/graphs/{task}/sequences` | session-log lines | merge stats |
//! | GET | `/graphs/{task}` | | graph document |
//! | POST | `/graphs/{task}/match` | `{spec, M}` | match result |
//! | POST | `/graphs/{task}/recommend` | `{spec, userPref?, M?, T?, dataset?}` | recommendations |
//! | POST | `/graphs/{task}/nodes/{id}/upvote` | | updated node |
//! | POST | `/sessions/events` | session-log lines | events per session |
//! | GET | `/sessions/{id}` | | session-log lines |
//!
//! Errors are `{code, message, detail}` with status 400, 404 or 409.

pub mod api;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Multipart, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;

use dataslicer_core::{parse_session_log, save_graph, LogEvent};

pub use api::ApiError;
pub use state::{AppState, Snapshot};

type Reply = Result<Response, ApiError>;

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status_code(), self.body())
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body))
        .expect("static headers")
}

fn ok(body: String) -> Reply {
    Ok(json_response(StatusCode::OK, body))
}

fn utf8(bytes: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(bytes).map_err(|e| ApiError::bad_request("invalid_encoding", e.to_string()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/datasets", post(upload_dataset))
        .route("/datasets/{name}/evaluate", post(evaluate_slice))
        .route("/graphs", get(list_graphs))
        .route("/graphs/{task}", get(graph_document))
        .route("/graphs/{task}/sequences", post(ingest_sequences))
        .route("/graphs/{task}/match", post(match_slices))
        .route("/graphs/{task}/recommend", post(recommend_slices))
        .route("/graphs/{task}/nodes/{id}/upvote", post(upvote_node))
        .route("/sessions/events", post(record_events))
        .route("/sessions/{id}", get(session_log))
        .fallback(|| async { ApiError::not_found("no_route", "no such endpoint") })
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

async fn upload_dataset(State(state): State<Arc<AppState>>, mut form: Multipart) -> Reply {
    let bad = |e: axum::extract::multipart::MultipartError| ApiError::bad_request("invalid_multipart", e.body_text());
    let (mut schema, mut csv) = (None, None);
    while let Some(field) = form.next_field().await.map_err(bad)? {
        match field.name() {
            Some("schema") => schema = Some(field.text().await.map_err(bad)?),
            Some("csv") => csv = Some(field.bytes().await.map_err(bad)?),
            Some(other) => {
                return Err(ApiError::bad_request(
                    "invalid_multipart",
                    format!("unexpected part {other:?}"),
                ))
            }
            None => return Err(ApiError::bad_request("invalid_multipart", "unnamed part")),
        }
    }
    let schema = schema.ok_or_else(|| ApiError::bad_request("invalid_multipart", "missing part \"schema\""))?;
    let csv = csv.ok_or_else(|| ApiError::bad_request("invalid_multipart", "missing part \"csv\""))?;
    let dataset = state.insert_dataset(api::load_dataset_from(&schema, &csv)?)?;
    Ok(json_response(StatusCode::CREATED, api::dataset_body(&dataset)))
}

async fn evaluate_slice(State(state): State<Arc<AppState>>, Path(name): Path<String>, body: Bytes) -> Reply {
    let snap = state.snapshot();
    let dataset = snap.dataset(&name)?;
    ok(api::evaluate_body(dataset, &api::parse_body(&body)?)?)
}

async fn list_graphs(State(state): State<Arc<AppState>>) -> Reply {
    let snap = state.snapshot();
    let tasks: Vec<serde_json::Value> = snap
        .graphs
        .iter()
        .map(|(task, e)| {
            serde_json::json!({
                "taskType": task,
                "mode": e.graph.mode(),
                "nodes": e.graph.node_count(),
                "edges": e.graph.edge_count(),
            })
        })
        .collect();
    ok(api::to_json(&tasks))
}

async fn graph_document(State(state): State<Arc<AppState>>, Path(task): Path<String>) -> Reply {
    ok(save_graph(state.snapshot().graph(&task)?))
}

async fn ingest_sequences(State(state): State<Arc<AppState>>, Path(task): Path<String>, body: Bytes) -> Reply {
    let sequences = parse_session_log(utf8(&body)?)?;
    ok(api::to_json(&state.ingest(&task, &sequences)?))
}

async fn match_slices(State(state): State<Arc<AppState>>, Path(task): Path<String>, body: Bytes) -> Reply {
    let snap = state.snapshot();
    ok(api::match_body(snap.graph(&task)?, &api::parse_body(&body)?)?)
}

async fn recommend_slices(State(state): State<Arc<AppState>>, Path(task): Path<String>, body: Bytes) -> Reply {
    let snap = state.snapshot();
    let graph = snap.graph(&task)?;
    let req: api::RecommendRequest = api::parse_body(&body)?;
    let schema = match (&req.dataset, &graph.meta.dataset) {
        (Some(name), _) => Some(snap.dataset(name)?.schema()),
        (None, Some(bound)) => snap.datasets.get(bound).map(|d| d.schema()),
        (None, None) => None,
    };
    ok(api::recommend_body(graph, &req, schema, state.threshold_ms())?)
}

async fn upvote_node(State(state): State<Arc<AppState>>, Path((task, id)): Path<(String, String)>) -> Reply {
    let node = state.upvote(&task, &id.as_str().into())?;
    ok(api::upvote_body(&node, state.threshold_ms()))
}

async fn record_events(State(state): State<Arc<AppState>>, body: Bytes) -> Reply {
    let text = utf8(&body)?;
    let events = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| LogEvent::parse(l, i + 1))
        .collect::<Result<Vec<_>, _>>()?;
    if events.is_empty() {
        return Err(ApiError::bad_request("invalid_log", "no events in body"));
    }
    ok(api::to_json(&state.record(events)?))
}

async fn session_log(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Reply {
    let snap = state.snapshot();
    let events = snap
        .sessions
        .get(&id)
        .ok_or_else(|| ApiError::not_found("unknown_session", format!("no session {id:?}")))?;
    let mut text = String::new();
    for ev in events.iter() {
        text.push_str(&ev.to_line());
        text.push('\n');
    }
    Ok(Response::builder()
        .status(StatusCode::OK)
        .header(header::CONTENT_TYPE, "application/x-ndjson")
        .body(Body::from(text))
        .expect("static headers"))
}
