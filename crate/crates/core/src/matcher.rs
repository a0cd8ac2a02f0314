use std::cmp::Ordering;

use serde::Serialize;

use crate::error::GraphError;
use crate::field::FieldExpr;
use crate::graph::{DataSliceGraph, NodeId};
use crate::spec::{canonicalize, AbstractSpec, DataSpecification};

/// Size of the symmetric difference of two field collections, each read
/// as a set.
pub fn field_set_distance(a: &[FieldExpr], b: &[FieldExpr]) -> usize {
    sorted_set_distance(a.iter().collect(), b.iter().collect())
}

fn sorted_set_distance<'a>(mut a: Vec<&'a FieldExpr>, mut b: Vec<&'a FieldExpr>) -> usize {
    for v in [&mut a, &mut b] {
        v.sort_unstable();
        v.dedup();
    }
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

fn pooled(s: &AbstractSpec) -> Vec<&FieldExpr> {
    s.x.iter().chain(s.y.iter()).chain(s.layers.iter()).collect()
}

/// Distance between two abstract specifications.
pub trait SliceDistance {
    fn distance(&self, a: &AbstractSpec, b: &AbstractSpec) -> usize;
}

/// Sum of the select, filter and grouping set distances. X, Y and the
/// layers form one pooled select set, so swapping axes or moving a field
/// between an axis and a layer costs nothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct SetEditDistance;

impl SliceDistance for SetEditDistance {
    fn distance(&self, a: &AbstractSpec, b: &AbstractSpec) -> usize {
        let select = sorted_set_distance(pooled(a), pooled(b));
        select + field_set_distance(&a.filters, &b.filters) + field_set_distance(&a.grouping, &b.grouping)
    }
}

pub fn spec_distance(a: &AbstractSpec, b: &AbstractSpec) -> usize {
    SetEditDistance.distance(a, b)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchedNode {
    pub node_id: NodeId,
    pub display_index: u32,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchResult {
    /// Nodes at the minimum distance, ordered by display index.
    pub nodes: Vec<MatchedNode>,
    pub min_distance: usize,
}

impl MatchResult {
    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|n| n.node_id.clone()).collect()
    }
}

pub fn match_data_slices(
    graph: &DataSliceGraph,
    spec: &DataSpecification,
    m: usize,
) -> Result<MatchResult, GraphError> {
    match_with(graph, spec, m, &SetEditDistance)
}

/// Nodes nearest to `spec` under `metric`; at most `m` of them, ties
/// broken by smallest display index.
pub fn match_with(
    graph: &DataSliceGraph,
    spec: &DataSpecification,
    m: usize,
    metric: &dyn SliceDistance,
) -> Result<MatchResult, GraphError> {
    if m == 0 {
        return Err(GraphError::InvalidArgument("M must be at least 1".into()));
    }
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let query = canonicalize(spec);
    let scored: Vec<MatchedNode> = graph
        .nodes()
        .map(|n| MatchedNode {
            node_id: n.node_id.clone(),
            display_index: n.display_index,
            distance: metric.distance(&query, &n.spec),
        })
        .collect();
    let min_distance = scored.iter().map(|n| n.distance).min().expect("graph is not empty");
    let mut nodes: Vec<MatchedNode> = scored.into_iter().filter(|n| n.distance == min_distance).collect();
    nodes.sort_by_key(|n| n.display_index);
    nodes.truncate(m);
    Ok(MatchResult { nodes, min_distance })
}
