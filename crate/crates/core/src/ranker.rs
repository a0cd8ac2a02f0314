//! Ranking of interesting nodes by weighted shortest-path distance from
//! the matched nodes.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::error::GraphError;
use crate::graph::{DataSliceGraph, NodeId, SliceEdge};

/// 1 for any edge an expert traversed, otherwise `1 + 1/userCount`.
pub fn edge_weight(edge: &SliceEdge) -> f64 {
    if edge.expert_count >= 1 {
        1.0
    } else {
        1.0 + 1.0 / f64::from(edge.user_count.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Directed adjacency over dense node indices.
struct Adjacency<'g> {
    ids: Vec<&'g NodeId>,
    index: BTreeMap<&'g NodeId, usize>,
    out: Vec<Vec<(usize, f64)>>,
}

impl<'g> Adjacency<'g> {
    fn new(graph: &'g DataSliceGraph) -> Self {
        let ids: Vec<&NodeId> = graph.nodes().map(|n| &n.node_id).collect();
        let index: BTreeMap<&NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut out = vec![Vec::new(); ids.len()];
        for e in graph.edges() {
            out[index[&e.from]].push((index[&e.to], edge_weight(e)));
        }
        Adjacency { ids, index, out }
    }

    fn resolve(&self, id: &NodeId) -> Result<usize, GraphError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }
}

/// Multi-source Dijkstra over an adjacency list of `(target, weight)`
/// pairs with nonnegative weights. `None` marks unreachable vertices.
pub fn dijkstra(out: &[Vec<(usize, f64)>], sources: &[usize]) -> Vec<Option<f64>> {
    let mut dist: Vec<Option<f64>> = vec![None; out.len()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = Some(0.0);
        heap.push(Reverse(Entry(0.0, s)));
    }
    while let Some(Reverse(Entry(d, u))) = heap.pop() {
        if dist[u].is_some_and(|best| d > best) {
            continue;
        }
        for &(v, w) in &out[u] {
            let nd = d + w;
            if dist[v].is_none_or(|cur| nd < cur) {
                dist[v] = Some(nd);
                heap.push(Reverse(Entry(nd, v)));
            }
        }
    }
    dist
}

/// Single-source shortest distances. Unreachable nodes are absent.
pub fn shortest_paths(graph: &DataSliceGraph, source: &NodeId) -> Result<BTreeMap<NodeId, f64>, GraphError> {
    multi_source_shortest_paths(graph, std::slice::from_ref(source))
}

/// Distance to each node from the nearest of `sources`.
pub fn multi_source_shortest_paths(
    graph: &DataSliceGraph,
    sources: &[NodeId],
) -> Result<BTreeMap<NodeId, f64>, GraphError> {
    let adj = Adjacency::new(graph);
    let src = sources.iter().map(|s| adj.resolve(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(dijkstra(&adj.out, &src)
        .into_iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (adj.ids[i].clone(), d)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RankedRecommendation {
    pub node_id: NodeId,
    pub display_index: u32,
    /// `None` when no matched node reaches this one.
    pub path_distance: Option<f64>,
    pub effective_interestingness: u64,
    pub via_fill: bool,
}

/// Up to `m` interesting nodes closest to any of `matched`.
///
/// Candidates have effective interestingness strictly above `threshold_ms`
/// and are ordered by distance, then interestingness (descending), then
/// display index. When fewer than `m` candidates are reachable, the most
/// interesting remaining nodes are appended with `via_fill` set.
pub fn rank_data_slices(
    graph: &DataSliceGraph,
    matched: &[NodeId],
    m: usize,
    threshold_ms: u64,
) -> Result<Vec<RankedRecommendation>, GraphError> {
    if matched.is_empty() {
        return Err(GraphError::InvalidArgument("matched set is empty".into()));
    }
    let dist = multi_source_shortest_paths(graph, matched)?;
    if m == 0 {
        return Ok(Vec::new());
    }

    let entry = |id: &NodeId, via_fill: bool| {
        let node = graph.node(id).expect("ids come from the graph");
        RankedRecommendation {
            node_id: id.clone(),
            display_index: node.display_index,
            path_distance: dist.get(id).copied(),
            effective_interestingness: node.effective_interestingness(threshold_ms),
            via_fill,
        }
    };

    let mut ranked: Vec<RankedRecommendation> = graph
        .nodes()
        .filter(|n| n.effective_interestingness(threshold_ms) > threshold_ms && dist.contains_key(&n.node_id))
        .map(|n| entry(&n.node_id, false))
        .collect();
    ranked.sort_by(|a, b| {
        a.path_distance
            .unwrap_or(f64::INFINITY)
            .total_cmp(&b.path_distance.unwrap_or(f64::INFINITY))
            .then(b.effective_interestingness.cmp(&a.effective_interestingness))
            .then(a.display_index.cmp(&b.display_index))
    });
    ranked.truncate(m);

    if ranked.len() < m {
        let listed: BTreeSet<NodeId> = ranked.iter().map(|r| r.node_id.clone()).collect();
        let mut rest: Vec<RankedRecommendation> = graph
            .nodes()
            .filter(|n| !listed.contains(&n.node_id))
            .map(|n| entry(&n.node_id, true))
            .collect();
        rest.sort_by(|a, b| {
            b.effective_interestingness
                .cmp(&a.effective_interestingness)
                .then(a.display_index.cmp(&b.display_index))
        });
        ranked.extend(rest.into_iter().take(m - ranked.len()));
    }
    Ok(ranked)
}
