use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse field {input:?} at offset {offset}: {reason}")]
pub struct ParseFieldError {
    pub input: String,
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("invalid specification: {0}")]
    Invalid(String),
    #[error("inapplicable operation {op}: {reason}")]
    InapplicableOp { op: String, reason: String },
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("type error at row {row}, column {column:?}: cannot read {text:?} as {expected}")]
    TypeError {
        row: usize,
        column: String,
        text: String,
        expected: &'static str,
    },
    #[error("unresolved field {0:?}")]
    UnresolvedField(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("unsupported expression {0:?}")]
    Unsupported(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("task mismatch: graph is {expected:?}, sequence is {found:?}")]
    TaskMismatch { expected: String, found: String },
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("graph document error at {location}: {reason}")]
    Format { location: String, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("session {session:?} is inconsistent: {reason}")]
    InconsistentSession { session: String, reason: String },
}

/// Union of the component errors, surfaced by the composed operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Log(#[from] LogError),
}
