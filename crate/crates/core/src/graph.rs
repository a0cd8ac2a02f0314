//! Data-slice graphs: nodes are abstract specifications observed in
//! session logs, edges are single navigation steps between them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GraphError, QueryError};
use crate::navop::{apply_nav_op, diff_abstract, diff_ops, NavOp};
use crate::query::DatasetSchema;
use crate::spec::{canonicalize, AbstractSpec, DataSpecification};
use crate::visual::VisualSpec;

/// Interestingness threshold used when none is given, in milliseconds.
pub const DEFAULT_THRESHOLD_MS: u64 = 3000;

pub const GRAPH_FORMAT_VERSION: u32 = 1;

/// Content hash of an abstract specification (first 16 hex digits of SHA-256).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn for_spec(spec: &AbstractSpec) -> NodeId {
        let digest = Sha256::digest(spec.canonical_json().as_bytes());
        NodeId(hex::encode(&digest[..8]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Expert,
    Regular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionEvent {
    pub spec: DataSpecification,
    pub visual: VisualSpec,
    pub dwell_ms: u64,
    pub timestamp_ms: i64,
}

/// One user's exploration on one task, in time order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionSequence {
    pub session_id: String,
    pub role: Role,
    pub task_type: String,
    pub events: Vec<SessionEvent>,
}

impl SessionSequence {
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.events.is_empty() {
            return Err(GraphError::InvalidArgument(format!(
                "session {:?} has no events",
                self.session_id
            )));
        }
        if self.events.windows(2).any(|w| w[1].timestamp_ms < w[0].timestamp_ms) {
            return Err(GraphError::InvalidArgument(format!(
                "session {:?} has decreasing timestamps",
                self.session_id
            )));
        }
        Ok(())
    }
}

/// Rewrite a sequence so every consecutive pair differs by exactly one
/// navigation operation.
///
/// Multi-step transitions are expanded along the canonical edit script;
/// inserted events carry zero dwell and the preceding visual spec.
/// Consecutive events with equal abstract specs collapse into the first,
/// which accumulates their dwell.
pub fn normalize_sequence(seq: &SessionSequence) -> SessionSequence {
    let mut events: Vec<SessionEvent> = Vec::with_capacity(seq.events.len());
    for event in &seq.events {
        let Some(prev) = events.last_mut() else {
            events.push(event.clone());
            continue;
        };
        let ops = diff_ops(&prev.spec, &event.spec);
        if ops.is_empty() {
            prev.dwell_ms += event.dwell_ms;
            continue;
        }
        let (visual, timestamp_ms) = (prev.visual.clone(), prev.timestamp_ms);
        let mut spec = prev.spec.clone();
        for op in &ops[..ops.len() - 1] {
            spec = apply_nav_op(&spec, op).expect("canonical edit scripts replay");
            events.push(SessionEvent {
                spec: spec.clone(),
                visual: visual.clone(),
                dwell_ms: 0,
                timestamp_ms,
            });
        }
        events.push(event.clone());
    }
    SessionSequence { events, ..seq.clone() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SliceNode {
    pub node_id: NodeId,
    pub display_index: u32,
    pub spec: AbstractSpec,
    pub interestingness_ms: u64,
    pub votes: u32,
    pub visual_specs: BTreeSet<VisualSpec>,
}

impl SliceNode {
    /// Stored interestingness plus one threshold's worth per upvote.
    pub fn effective_interestingness(&self, threshold_ms: u64) -> u64 {
        self.interestingness_ms
            .saturating_add(u64::from(self.votes).saturating_mul(threshold_ms))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SliceEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub expert_count: u32,
    pub user_count: u32,
    pub nav_op: NavOp,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionRef {
    pub session_id: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphMeta {
    pub dataset: Option<String>,
    pub threshold_ms: u64,
    /// Merged sessions, kept sorted so the record is order-independent.
    pub sessions: Vec<SessionRef>,
}

impl Default for GraphMeta {
    fn default() -> Self {
        GraphMeta {
            dataset: None,
            threshold_ms: DEFAULT_THRESHOLD_MS,
            sessions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MergeStats {
    pub events: usize,
    pub nodes_added: usize,
    pub edges_added: usize,
    pub traversals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSliceGraph {
    pub task_type: String,
    pub meta: GraphMeta,
    nodes: BTreeMap<NodeId, SliceNode>,
    edges: BTreeMap<(NodeId, NodeId), SliceEdge>,
}

impl DataSliceGraph {
    pub fn new(task_type: impl Into<String>) -> Self {
        DataSliceGraph {
            task_type: task_type.into(),
            meta: GraphMeta::default(),
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in node-id order.
    pub fn nodes(&self) -> impl Iterator<Item = &SliceNode> {
        self.nodes.values()
    }

    /// Edges in (from, to) order.
    pub fn edges(&self) -> impl Iterator<Item = &SliceEdge> {
        self.edges.values()
    }

    pub fn node(&self, id: &NodeId) -> Option<&SliceNode> {
        self.nodes.get(id)
    }

    pub fn node_mut(&mut self, id: &NodeId) -> Option<&mut SliceNode> {
        self.nodes.get_mut(id)
    }

    pub fn edge(&self, from: &NodeId, to: &NodeId) -> Option<&SliceEdge> {
        self.edges.get(&(from.clone(), to.clone()))
    }

    pub fn edge_mut(&mut self, from: &NodeId, to: &NodeId) -> Option<&mut SliceEdge> {
        self.edges.get_mut(&(from.clone(), to.clone()))
    }

    pub fn node_for_spec(&self, spec: &AbstractSpec) -> Option<&SliceNode> {
        self.nodes.get(&NodeId::for_spec(spec))
    }

    pub fn node_by_index(&self, display_index: u32) -> Option<&SliceNode> {
        self.nodes.values().find(|n| n.display_index == display_index)
    }

    /// `"prediction"` when any expert session contributed, else `"recommendation"`.
    pub fn mode(&self) -> &'static str {
        let expert = self.meta.sessions.iter().any(|s| s.role == Role::Expert)
            || self.edges.values().any(|e| e.expert_count > 0);
        if expert {
            "prediction"
        } else {
            "recommendation"
        }
    }

    /// Renumber display indices 1.. in node-id order.
    pub fn renumber(&mut self) {
        for (i, node) in self.nodes.values_mut().enumerate() {
            node.display_index = i as u32 + 1;
        }
    }

    fn upsert_node(&mut self, spec: AbstractSpec, event: &SessionEvent) -> (NodeId, bool) {
        let id = NodeId::for_spec(&spec);
        let next_index = self.nodes.len() as u32 + 1;
        let mut added = false;
        let node = self.nodes.entry(id.clone()).or_insert_with(|| {
            added = true;
            SliceNode {
                node_id: id.clone(),
                display_index: next_index,
                spec,
                interestingness_ms: 0,
                votes: 0,
                visual_specs: BTreeSet::new(),
            }
        });
        node.interestingness_ms = node.interestingness_ms.max(event.dwell_ms);
        node.visual_specs.insert(event.visual.clone());
        (id, added)
    }

    /// Merge one session into the graph. The session is normalized first.
    pub fn merge_sequence(&mut self, seq: &SessionSequence) -> Result<MergeStats, GraphError> {
        if seq.task_type != self.task_type {
            return Err(GraphError::TaskMismatch {
                expected: self.task_type.clone(),
                found: seq.task_type.clone(),
            });
        }
        seq.validate()?;
        let seq = normalize_sequence(seq);
        let mut stats = MergeStats {
            events: seq.events.len(),
            ..MergeStats::default()
        };

        let mut path = Vec::with_capacity(seq.events.len());
        for event in &seq.events {
            let (id, added) = self.upsert_node(canonicalize(&event.spec), event);
            stats.nodes_added += usize::from(added);
            path.push(id);
        }
        for pair in path.windows(2) {
            let (from, to) = (&pair[0], &pair[1]);
            let key = (from.clone(), to.clone());
            if !self.edges.contains_key(&key) {
                let ops = diff_abstract(&self.nodes[from].spec, &self.nodes[to].spec);
                debug_assert_eq!(ops.len(), 1, "normalized transitions are single operations");
                let nav_op = ops.into_iter().next().expect("distinct consecutive nodes");
                self.edges.insert(
                    key.clone(),
                    SliceEdge {
                        from: from.clone(),
                        to: to.clone(),
                        expert_count: 0,
                        user_count: 0,
                        nav_op,
                    },
                );
                stats.edges_added += 1;
            }
            let edge = self.edges.get_mut(&key).expect("inserted above");
            match seq.role {
                Role::Expert => edge.expert_count += 1,
                Role::Regular => edge.user_count += 1,
            }
            stats.traversals += 1;
        }

        let entry = SessionRef {
            session_id: seq.session_id.clone(),
            role: seq.role,
        };
        let at = self.meta.sessions.partition_point(|s| s <= &entry);
        self.meta.sessions.insert(at, entry);
        self.renumber();
        Ok(stats)
    }

    /// Record the bound dataset after checking every node's attributes
    /// exist in its schema.
    pub fn bind_dataset(&mut self, schema: &DatasetSchema) -> Result<(), QueryError> {
        for node in self.nodes.values() {
            for attr in node.spec.attributes() {
                if schema.column(attr).is_none() {
                    return Err(QueryError::UnresolvedField(attr.to_string()));
                }
            }
        }
        self.meta.dataset = Some(schema.name.clone());
        Ok(())
    }

    pub fn upvote(&mut self, id: &NodeId) -> Result<&SliceNode, GraphError> {
        let node = self
            .nodes
            .get_mut(id)
            .ok_or_else(|| GraphError::UnknownNode(id.clone()))?;
        node.votes += 1;
        Ok(node)
    }

    /// Canonical graph document: nodes by id, edges by (from, to).
    pub fn to_document(&self) -> String {
        let doc = GraphDocument {
            version: GRAPH_FORMAT_VERSION,
            task_type: self.task_type.clone(),
            meta: self.meta.clone(),
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.values().cloned().collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("graph serializes");
        text.push('\n');
        text
    }

    pub fn from_document(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Format {
            location: format!("line {} column {}", e.line(), e.column()),
            reason: e.to_string(),
        })?;
        let fail = |location: String, reason: &str| GraphError::Format {
            location,
            reason: reason.to_string(),
        };
        if doc.version != GRAPH_FORMAT_VERSION {
            return Err(fail("version".into(), "unsupported version"));
        }

        let mut nodes = BTreeMap::new();
        for (i, node) in doc.nodes.into_iter().enumerate() {
            if NodeId::for_spec(&node.spec) != node.node_id {
                return Err(fail(format!("nodes[{i}].nodeId"), "does not match the hash of spec"));
            }
            let canonical = canonicalize(&node.spec.embed());
            if canonical != node.spec {
                return Err(fail(format!("nodes[{i}].spec"), "spec is not in canonical form"));
            }
            if nodes.insert(node.node_id.clone(), node).is_some() {
                return Err(fail(format!("nodes[{i}]"), "duplicate node"));
            }
        }

        let mut edges = BTreeMap::new();
        for (i, edge) in doc.edges.into_iter().enumerate() {
            let (Some(from), Some(to)) = (nodes.get(&edge.from), nodes.get(&edge.to)) else {
                let end = if nodes.contains_key(&edge.from) { "to" } else { "from" };
                return Err(fail(format!("edges[{i}].{end}"), "unknown node"));
            };
            if edge.from == edge.to {
                return Err(fail(format!("edges[{i}]"), "self loop"));
            }
            if edge.expert_count + edge.user_count == 0 {
                return Err(fail(format!("edges[{i}]"), "edge has no traversals"));
            }
            let realized = apply_nav_op(&from.spec.embed(), &edge.nav_op)
                .map(|s| canonicalize(&s) == to.spec)
                .unwrap_or(false);
            if !realized {
                return Err(fail(
                    format!("edges[{i}].navOp"),
                    "operation does not connect the endpoints",
                ));
            }
            if edges.insert((edge.from.clone(), edge.to.clone()), edge).is_some() {
                return Err(fail(format!("edges[{i}]"), "duplicate edge"));
            }
        }

        Ok(DataSliceGraph {
            task_type: doc.task_type,
            meta: doc.meta,
            nodes,
            edges,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct GraphDocument {
    version: u32,
    task_type: String,
    meta: GraphMeta,
    nodes: Vec<SliceNode>,
    edges: Vec<SliceEdge>,
}

/// Fold every sequence into an empty graph. The result does not depend on
/// the order of `sequences`.
pub fn build_graph(sequences: &[SessionSequence], task_type: &str) -> Result<DataSliceGraph, GraphError> {
    if let Some(seq) = sequences.iter().find(|s| s.task_type != task_type) {
        return Err(GraphError::TaskMismatch {
            expected: task_type.to_string(),
            found: seq.task_type.clone(),
        });
    }
    let mut graph = DataSliceGraph::new(task_type);
    for seq in sequences {
        graph.merge_sequence(seq)?;
    }
    Ok(graph)
}

pub fn save_graph(graph: &DataSliceGraph) -> String {
    graph.to_document()
}

pub fn load_graph(document: &str) -> Result<DataSliceGraph, GraphError> {
    DataSliceGraph::from_document(document)
}
