//! Request bodies and response builders shared by the HTTP routes and the
//! command-line tool, so both emit the same bytes for the same request.

use axum::http::StatusCode;
use serde::{Deserialize, Serialize};

use dataslicer_core::query::{evaluate, load_dataset, Dataset, DatasetSchema};
use dataslicer_core::{
    match_data_slices, recommend, DataSliceGraph, DataSpecification, Error, GraphError, LogError, QueryError,
    RecommendOptions, SliceNode, SpecError, VisualSpec, DEFAULT_THRESHOLD_MS,
};

pub const DEFAULT_M: usize = dataslicer_core::recommend::DEFAULT_M;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRequest {
    pub spec: DataSpecification,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RecommendRequest {
    pub spec: DataSpecification,
    #[serde(default)]
    pub user_pref: Option<VisualSpec>,
    #[serde(rename = "M", default)]
    pub m: Option<usize>,
    #[serde(rename = "T", default)]
    pub t: Option<u64>,
    /// Name of a loaded dataset whose schema resolves fields and SQL.
    #[serde(default)]
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub spec: DataSpecification,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetSummary<'a> {
    pub name: &'a str,
    pub row_count: usize,
    pub columns: &'a [dataslicer_core::query::ColumnDef],
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UpvoteResponse<'a> {
    pub node: &'a SliceNode,
    pub effective_interestingness: u64,
    pub threshold_ms: u64,
}

fn default_m() -> usize {
    DEFAULT_M
}

/// Error body `{code, message, detail}` with its HTTP status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: &'static str,
    pub message: String,
    pub detail: serde_json::Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code,
            message: message.into(),
            detail: serde_json::Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn status_code(&self) -> StatusCode {
        StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR)
    }

    pub fn body(&self) -> String {
        to_json(self)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl From<GraphError> for ApiError {
    fn from(e: GraphError) -> Self {
        let message = e.to_string();
        match e {
            GraphError::TaskMismatch { expected, found } => {
                ApiError::new(StatusCode::CONFLICT, "task_mismatch", message)
                    .with_detail(serde_json::json!({ "expected": expected, "found": found }))
            }
            GraphError::UnknownNode(id) => {
                ApiError::not_found("unknown_node", message).with_detail(serde_json::json!({ "nodeId": id }))
            }
            GraphError::EmptyGraph => ApiError::bad_request("empty_graph", message),
            GraphError::Format { location, .. } => {
                ApiError::bad_request("graph_format", message).with_detail(serde_json::json!({ "location": location }))
            }
            GraphError::InvalidArgument(_) => ApiError::bad_request("invalid_argument", message),
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::UnresolvedField(_) => "unresolved_field",
            QueryError::TypeMismatch(_) | QueryError::TypeError { .. } => "type_error",
            QueryError::SchemaMismatch(_) | QueryError::InvalidSchema(_) => "invalid_schema",
            QueryError::Unsupported(_) => "unsupported",
            QueryError::Csv(_) => "invalid_csv",
        };
        ApiError::bad_request(code, e.to_string())
    }
}

impl From<SpecError> for ApiError {
    fn from(e: SpecError) -> Self {
        ApiError::bad_request("invalid_spec", e.to_string())
    }
}

impl From<LogError> for ApiError {
    fn from(e: LogError) -> Self {
        match &e {
            LogError::Format { line, .. } => {
                ApiError::bad_request("invalid_log", e.to_string()).with_detail(serde_json::json!({ "line": line }))
            }
            LogError::InconsistentSession { session, .. } => ApiError::bad_request("invalid_log", e.to_string())
                .with_detail(serde_json::json!({ "sessionId": session })),
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(e) => e.into(),
            Error::Query(e) => e.into(),
            Error::Graph(e) => e.into(),
            Error::Log(e) => e.into(),
        }
    }
}

/// Compact JSON, the single serialization used for every response body.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("response bodies serialize")
}

/// Parse a JSON request body; errors carry the line and column.
pub fn parse_body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| {
        ApiError::bad_request("invalid_json", e.to_string())
            .with_detail(serde_json::json!({ "line": e.line(), "column": e.column() }))
    })
}

fn checked_spec(spec: &DataSpecification) -> Result<(), ApiError> {
    spec.validate().map_err(ApiError::from)
}

pub fn match_body(graph: &DataSliceGraph, req: &MatchRequest) -> Result<String, ApiError> {
    checked_spec(&req.spec)?;
    Ok(to_json(&match_data_slices(graph, &req.spec, req.m)?))
}

/// `threshold_ms` applies when the request carries no `T`.
pub fn recommend_body(
    graph: &DataSliceGraph,
    req: &RecommendRequest,
    schema: Option<&DatasetSchema>,
    threshold_ms: u64,
) -> Result<String, ApiError> {
    checked_spec(&req.spec)?;
    let opts = RecommendOptions {
        schema,
        user_pref: req.user_pref.as_ref(),
        m: req.m.unwrap_or(DEFAULT_M),
        threshold_ms: req.t.unwrap_or(threshold_ms),
    };
    Ok(to_json(&recommend(graph, &req.spec, opts)?))
}

pub fn evaluate_body(dataset: &Dataset, req: &EvaluateRequest) -> Result<String, ApiError> {
    checked_spec(&req.spec)?;
    Ok(to_json(&evaluate(dataset, &req.spec)?))
}

pub fn dataset_body(dataset: &Dataset) -> String {
    to_json(&DatasetSummary {
        name: dataset.name(),
        row_count: dataset.row_count(),
        columns: &dataset.schema().columns,
    })
}

pub fn upvote_body(node: &SliceNode, threshold_ms: u64) -> String {
    to_json(&UpvoteResponse {
        node,
        effective_interestingness: node.effective_interestingness(threshold_ms),
        threshold_ms,
    })
}

/// Schema JSON plus CSV text into a dataset.
pub fn load_dataset_from(schema_json: &str, csv: &[u8]) -> Result<Dataset, ApiError> {
    let schema = DatasetSchema::from_json(schema_json)?;
    Ok(load_dataset(csv, schema)?)
}

/// Threshold from `DATASLICER_T` when set to an integer, else the default.
pub fn threshold_from_env() -> Result<u64, ApiError> {
    match std::env::var("DATASLICER_T") {
        Ok(v) => v.trim().parse().map_err(|_| {
            ApiError::bad_request(
                "invalid_threshold",
                format!("DATASLICER_T must be milliseconds, got {v:?}"),
            )
        }),
        Err(_) => Ok(DEFAULT_THRESHOLD_MS),
    }
}
