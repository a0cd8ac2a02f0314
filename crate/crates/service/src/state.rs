use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::http::StatusCode;

use dataslicer_core::log::sequences_from_events;
use dataslicer_core::query::Dataset;
use dataslicer_core::{save_graph, DataSliceGraph, LogEvent, MergeStats, NodeId, SessionSequence, SliceNode};

use crate::api::ApiError;

#[derive(Debug, Clone)]
pub struct GraphEntry {
    pub graph: Arc<DataSliceGraph>,
    /// File the graph document is rewritten to after each mutation.
    pub path: Option<PathBuf>,
}

/// Immutable view of everything the service holds. Readers clone the
/// `Arc` and never block writers for longer than that.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub graphs: BTreeMap<String, GraphEntry>,
    pub datasets: BTreeMap<String, Arc<Dataset>>,
    pub sessions: BTreeMap<String, Arc<Vec<LogEvent>>>,
}

impl Snapshot {
    pub fn graph(&self, task: &str) -> Result<&Arc<DataSliceGraph>, ApiError> {
        self.graphs
            .get(task)
            .map(|e| &e.graph)
            .ok_or_else(|| ApiError::not_found("unknown_graph", format!("no graph for task {task:?}")))
    }

    pub fn dataset(&self, name: &str) -> Result<&Arc<Dataset>, ApiError> {
        self.datasets
            .get(name)
            .ok_or_else(|| ApiError::not_found("unknown_dataset", format!("no dataset named {name:?}")))
    }
}

#[derive(Debug)]
pub struct AppState {
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
    persist_dir: Option<PathBuf>,
    threshold_ms: u64,
}

impl AppState {
    /// New graphs are persisted as `<persist_dir>/<task>.json` when a
    /// directory is given.
    pub fn new(persist_dir: Option<PathBuf>, threshold_ms: u64) -> Self {
        AppState {
            current: RwLock::new(Arc::new(Snapshot::default())),
            writer: Mutex::new(()),
            persist_dir,
            threshold_ms,
        }
    }

    pub fn threshold_ms(&self) -> u64 {
        self.threshold_ms
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    /// Run `edit` on a copy of the current snapshot and publish it if the
    /// edit succeeds. Writers are serialized.
    fn write<T>(&self, edit: impl FnOnce(&mut Snapshot) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let _guard = self.writer.lock().expect("writer lock");
        let mut next = (*self.snapshot()).clone();
        let out = edit(&mut next)?;
        *self.current.write().expect("snapshot lock") = Arc::new(next);
        Ok(out)
    }

    pub fn insert_graph(&self, graph: DataSliceGraph, path: Option<PathBuf>) -> Result<(), ApiError> {
        self.write(|s| {
            s.graphs.insert(
                graph.task_type.clone(),
                GraphEntry {
                    graph: Arc::new(graph),
                    path,
                },
            );
            Ok(())
        })
    }

    pub fn insert_dataset(&self, dataset: Dataset) -> Result<Arc<Dataset>, ApiError> {
        self.write(|s| {
            let ds = Arc::new(dataset);
            s.datasets.insert(ds.name().to_string(), ds.clone());
            Ok(ds)
        })
    }

    /// Merge sessions into the graph for `task`, creating it when absent.
    /// Either every session merges or none does.
    pub fn ingest(&self, task: &str, sequences: &[SessionSequence]) -> Result<MergeStats, ApiError> {
        self.write(|s| {
            let entry = s.graphs.entry(task.to_string()).or_insert_with(|| GraphEntry {
                graph: Arc::new(DataSliceGraph::new(task)),
                path: self.persist_dir.as_ref().map(|d| d.join(format!("{task}.json"))),
            });
            let mut graph = (*entry.graph).clone();
            let mut total = MergeStats::default();
            for seq in sequences {
                let stats = graph.merge_sequence(seq)?;
                total.events += stats.events;
                total.nodes_added += stats.nodes_added;
                total.edges_added += stats.edges_added;
                total.traversals += stats.traversals;
            }
            persist(entry.path.as_deref(), &graph)?;
            entry.graph = Arc::new(graph);
            Ok(total)
        })
    }

    pub fn upvote(&self, task: &str, id: &NodeId) -> Result<SliceNode, ApiError> {
        self.write(|s| {
            let entry = s
                .graphs
                .get_mut(task)
                .ok_or_else(|| ApiError::not_found("unknown_graph", format!("no graph for task {task:?}")))?;
            let mut graph = (*entry.graph).clone();
            let node = graph.upvote(id)?.clone();
            persist(entry.path.as_deref(), &graph)?;
            entry.graph = Arc::new(graph);
            Ok(node)
        })
    }

    /// Append recorder events, checking each touched session stays
    /// consistent in role and task.
    pub fn record(&self, events: Vec<LogEvent>) -> Result<BTreeMap<String, usize>, ApiError> {
        self.write(|s| {
            let mut touched: BTreeMap<String, Vec<LogEvent>> = BTreeMap::new();
            for ev in events {
                touched
                    .entry(ev.session_id.clone())
                    .or_insert_with(|| s.sessions.get(&ev.session_id).map(|v| v.to_vec()).unwrap_or_default())
                    .push(ev);
            }
            let mut counts = BTreeMap::new();
            for (id, evs) in touched {
                sequences_from_events(evs.clone())?;
                counts.insert(id.clone(), evs.len());
                s.sessions.insert(id, Arc::new(evs));
            }
            Ok(counts)
        })
    }
}

fn persist(path: Option<&Path>, graph: &DataSliceGraph) -> Result<(), ApiError> {
    let Some(path) = path else { return Ok(()) };
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, save_graph(graph))
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| {
            ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "persist_failed", e.to_string())
                .with_detail(serde_json::json!({ "path": path.display().to_string() }))
        })
}
