//! Task-aware recommendation of data slices for visual exploration.
//!
//! Exploration sessions are logged as sequences of data specifications.
//! Sessions on the same task are merged into a [`DataSliceGraph`] whose
//! nodes are abstract specifications and whose edges are single
//! navigation operations. A user's current specification is matched to
//! the nearest nodes, and the interesting nodes closest downstream are
//! recommended, contextualized with the user's own filters and rendered
//! as SQL text and a visual spec.

pub mod error;
pub mod field;
pub mod graph;
pub mod log;
pub mod matcher;
pub mod navop;
pub mod query;
pub mod ranker;
pub mod recommend;
pub mod spec;
pub mod visual;

pub use error::{Error, GraphError, LogError, ParseFieldError, QueryError, SpecError};
pub use field::{AggOp, ComplexOp, FieldExpr};
pub use graph::{
    build_graph, load_graph, normalize_sequence, save_graph, DataSliceGraph, MergeStats, NodeId, Role, SessionEvent,
    SessionSequence, SliceEdge, SliceNode, DEFAULT_THRESHOLD_MS,
};
pub use log::{mark_interesting, parse_session_log, LogEvent};
pub use matcher::{field_set_distance, match_data_slices, spec_distance, MatchResult, SliceDistance};
pub use navop::{apply_nav_op, diff_ops, NavOp};
pub use query::{evaluate, load_dataset, to_sql_template, Dataset, DatasetSchema, ResultTable};
pub use ranker::{edge_weight, rank_data_slices, shortest_paths, RankedRecommendation};
pub use recommend::{
    choose_visual_spec, contextualize, recommend, RecommendOptions, RecommendResponse, Recommendation,
};
pub use spec::{canonicalize, AbstractSpec, Comparator, DataSpecification, FilterPredicate, Literal};
pub use visual::VisualSpec;
