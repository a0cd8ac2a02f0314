//! End-to-end checks shared by the acceptance runner and the regular
//! integration tests. Each returns a one-line summary on success and the
//! list of violated expectations on failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dataslicer_core::graph::SliceEdge;
use dataslicer_core::query::{evaluate, load_dataset, to_sql_template};
use dataslicer_core::ranker::{dijkstra, multi_source_shortest_paths};
use dataslicer_core::{
    build_graph, canonicalize, diff_ops, edge_weight, match_data_slices, normalize_sequence, rank_data_slices,
    recommend, save_graph, spec_distance, AggOp, DataSliceGraph, FieldExpr, NavOp, RecommendOptions, Role,
    SessionSequence, DEFAULT_THRESHOLD_MS,
};

use super::gen::{self, random_abstract, random_sessions};
use super::reference::{reference_evaluate, tables_match};
use super::{fig1b, fig3_labels, fig3_sequence, id_of, label_of, quake_schema};

pub type Outcome = Result<String, String>;

#[derive(Default)]
struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn within(&mut self, started: Instant, budget: Duration) {
        let took = started.elapsed();
        self.expect(took < budget, format!("took {took:?}, budget {budget:?}"));
    }

    fn finish(self, summary: String) -> Outcome {
        if self.failures.is_empty() {
            Ok(summary)
        } else {
            Err(self.failures.join("; "))
        }
    }
}

pub fn fig3_golden() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let labels = fig3_labels();
    let graph = build_graph(&[fig3_sequence()], "outliers").map_err(|e| e.to_string())?;
    c.expect(
        graph.node_count() == 6,
        format!("expected 6 nodes, built {}", graph.node_count()),
    );
    c.expect(
        graph.edge_count() == 7,
        format!("expected 7 directed edges, built {}", graph.edge_count()),
    );

    let matched = match_data_slices(&graph, &fig1b(), 10).map_err(|e| e.to_string())?;
    let matched_labels: BTreeSet<u32> = matched.nodes.iter().map(|n| label_of(&labels, &n.node_id)).collect();
    c.expect(
        matched_labels == BTreeSet::from([8, 23]),
        format!("matched {matched_labels:?}, expected {{8, 23}}"),
    );

    let interesting: BTreeSet<u32> = graph
        .nodes()
        .filter(|n| n.interestingness_ms > DEFAULT_THRESHOLD_MS)
        .map(|n| label_of(&labels, &n.node_id))
        .collect();
    c.expect(
        interesting == BTreeSet::from([9, 23]),
        format!("interesting {interesting:?}"),
    );

    let ranked = rank_data_slices(&graph, &matched.node_ids(), 2, 3000).map_err(|e| e.to_string())?;
    let got: Vec<(u32, Option<f64>, bool)> = ranked
        .iter()
        .map(|r| (label_of(&labels, &r.node_id), r.path_distance, r.via_fill))
        .collect();
    c.expect(
        got == vec![(23, Some(0.0), false), (9, Some(1.0), false)],
        format!("ranked {got:?}"),
    );
    c.within(started, Duration::from_secs(1));
    c.finish(format!(
        "{} nodes, {} edges, matched {{8, 23}}, ranked [23 @ 0, 9 @ 1] (node 9 = {})",
        graph.node_count(),
        graph.edge_count(),
        id_of(&labels, 9)
    ))
}

pub fn order_independence() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = StdRng::seed_from_u64(11);
    let sessions = random_sessions(&mut rng, 5, "task", 8);
    let reference = save_graph(&build_graph(&sessions, "task").map_err(|e| e.to_string())?);
    let mut count = 0;
    for perm in (0..sessions.len()).permutations(sessions.len()) {
        let ordered: Vec<SessionSequence> = perm.iter().map(|&i| sessions[i].clone()).collect();
        let doc = save_graph(&build_graph(&ordered, "task").map_err(|e| e.to_string())?);
        c.expect(doc == reference, format!("permutation {perm:?} serializes differently"));
        count += 1;
    }
    c.expect(count == 120, format!("ran {count} permutations"));
    c.within(started, Duration::from_secs(10));
    c.finish(format!(
        "{count} permutations byte-identical ({} bytes)",
        reference.len()
    ))
}

pub fn metric_suite() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = StdRng::seed_from_u64(23);
    for i in 0..1000 {
        let (a, b, d) = (
            random_abstract(&mut rng),
            random_abstract(&mut rng),
            random_abstract(&mut rng),
        );
        let ab = spec_distance(&a, &b);
        c.expect(ab == spec_distance(&b, &a), format!("asymmetric at triple {i}"));
        c.expect(
            spec_distance(&a, &a) == 0,
            format!("nonzero self distance at triple {i}"),
        );
        let same = a.select_set() == b.select_set() && a.filters == b.filters && a.grouping == b.grouping;
        c.expect(
            (ab == 0) == same,
            format!("zero distance disagrees with set equality at triple {i}"),
        );
        c.expect(
            spec_distance(&a, &d) <= ab + spec_distance(&b, &d),
            format!("triangle inequality violated at triple {i}"),
        );
    }

    let graph = build_graph(&random_sessions(&mut rng, 6, "t", 10), "t").map_err(|e| e.to_string())?;
    for i in 0..200 {
        let q = gen::random_spec(&mut rng);
        let mut swapped = q.clone();
        std::mem::swap(&mut swapped.x, &mut swapped.y);
        let (cq, cs) = (canonicalize(&q), canonicalize(&swapped));
        let same = graph
            .nodes()
            .all(|n| spec_distance(&cq, &n.spec) == spec_distance(&cs, &n.spec));
        c.expect(same, format!("axis swap changed a distance for query {i}"));
        let m1 = match_data_slices(&graph, &q, 5).map_err(|e| e.to_string())?;
        let m2 = match_data_slices(&graph, &swapped, 5).map_err(|e| e.to_string())?;
        c.expect(m1 == m2, format!("axis swap changed the match for query {i}"));
    }
    c.within(started, Duration::from_secs(5));
    c.finish(format!(
        "1000 triples, 200 axis swaps over {} nodes",
        graph.node_count()
    ))
}

const WEIGHTS: [f64; 4] = [1.0, 1.25, 1.5, 2.0];

/// Minimum over every simple path from `src`, by exhaustive search.
pub fn brute_force_paths(adj: &[Vec<(usize, f64)>], src: usize) -> Vec<Option<f64>> {
    fn walk(adj: &[Vec<(usize, f64)>], u: usize, d: f64, seen: &mut Vec<bool>, best: &mut Vec<Option<f64>>) {
        if best[u].is_none_or(|b| d < b) {
            best[u] = Some(d);
        }
        for &(v, w) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                walk(adj, v, d + w, seen, best);
                seen[v] = false;
            }
        }
    }
    let mut best = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[src] = true;
    walk(adj, src, 0.0, &mut seen, &mut best);
    best
}

fn agree(a: &[Option<f64>], b: &[Option<f64>]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-9,
        (None, None) => true,
        _ => false,
    })
}

/// Adjacency for an edge-state vector over all ordered pairs; state 0 is
/// "no edge", state k is weight `WEIGHTS[k - 1]`.
fn adjacency(n: usize, states: &[usize]) -> Vec<Vec<(usize, f64)>> {
    let pairs = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)));
    let mut adj = vec![Vec::new(); n];
    for ((u, v), &s) in pairs.zip(states) {
        if s > 0 {
            adj[u].push((v, WEIGHTS[s - 1]));
        }
    }
    adj
}

pub fn shortest_path_oracle() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut graphs = 0usize;
    let mut check = |adj: &[Vec<(usize, f64)>], c: &mut Checks| {
        graphs += 1;
        for s in 0..adj.len() {
            if !agree(&dijkstra(adj, &[s]), &brute_force_paths(adj, s)) {
                c.expect(false, format!("mismatch on {adj:?} from {s}"));
            }
        }
    };

    // every weighted digraph on up to three vertices
    for n in 1..=3 {
        let slots = n * (n - 1);
        for code in 0..5usize.pow(slots as u32) {
            let states: Vec<usize> = (0..slots).map(|i| code / 5usize.pow(i as u32) % 5).collect();
            check(&adjacency(n, &states), &mut c);
        }
    }
    // every edge set on four vertices, weights rotated through the palette
    for mask in 0..1usize << 12 {
        for shift in 0..WEIGHTS.len() {
            let states: Vec<usize> = (0..12)
                .map(|i| if mask >> i & 1 == 1 { (i + shift) % 4 + 1 } else { 0 })
                .collect();
            check(&adjacency(4, &states), &mut c);
        }
    }
    // five and six vertices: random edge sets and weights
    let mut rng = StdRng::seed_from_u64(5);
    for n in [5, 6] {
        for _ in 0..6000 {
            let density = rng.gen_range(0.1..0.9);
            let states: Vec<usize> = (0..n * (n - 1))
                .map(|_| if rng.gen_bool(density) { rng.gen_range(1..=4) } else { 0 })
                .collect();
            check(&adjacency(n, &states), &mut c);
        }
    }
    c.within(started, Duration::from_secs(30));
    c.finish(format!("{graphs} digraphs agree within 1e-9"))
}

fn edge(expert: u32, user: u32) -> SliceEdge {
    SliceEdge {
        from: "a".into(),
        to: "b".into(),
        expert_count: expert,
        user_count: user,
        nav_op: NavOp::AddGroupField {
            field: FieldExpr::simple("place"),
        },
    }
}

pub fn edge_weight_law() -> Outcome {
    let mut c = Checks::default();
    c.expect(edge_weight(&edge(1, 0)) == 1.0, "expert edge is not 1.0");
    c.expect(edge_weight(&edge(3, 9)) == 1.0, "mixed edge is not 1.0");
    for (n, want) in [(1, 2.0), (2, 1.5), (4, 1.25), (10, 1.1)] {
        let got = edge_weight(&edge(0, n));
        c.expect((got - want).abs() <= 1e-12, format!("n_u = {n}: {got} != {want}"));
    }
    let series: Vec<f64> = (1..=1000).map(|n| edge_weight(&edge(0, n))).collect();
    c.expect(series.windows(2).all(|w| w[1] <= w[0]), "weight increases with traffic");
    c.finish("1.0 for experts; 2.0, 1.5, 1.25, 1.1 for n_u = 1, 2, 4, 10; nonincreasing".into())
}

pub fn query_oracle() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = StdRng::seed_from_u64(97);
    let mut aggs: BTreeSet<String> = BTreeSet::new();
    let (mut where_seen, mut having_seen, mut cases, mut rows) = (0, 0, 0, 0);
    for d in 0..100 {
        let ds = gen::oracle_dataset(&mut rng, 200);
        for s in 0..20 {
            let spec = gen::oracle_spec(&mut rng);
            for f in spec.all_fields() {
                if let FieldExpr::Aggregated(op, _) = f {
                    aggs.insert(op.keyword().to_string());
                }
            }
            where_seen += spec
                .filters
                .iter()
                .filter(|p| !p.aggregated && !p.is_placeholder())
                .count();
            having_seen += spec.filters.iter().filter(|p| p.aggregated).count();
            match evaluate(&ds, &spec) {
                Ok(table) => {
                    let want = reference_evaluate(&ds, &spec);
                    rows += want.len();
                    c.expect(
                        tables_match(&table.rows, &want),
                        format!("dataset {d} spec {s}: {spec}"),
                    );
                }
                Err(e) => c.expect(false, format!("dataset {d} spec {s}: {e}")),
            }
            cases += 1;
        }
    }
    c.expect(aggs.len() == AggOp::ALL.len(), format!("aggregates covered: {aggs:?}"));
    c.expect(where_seen > 0 && having_seen > 0, "WHERE and HAVING not both exercised");
    c.within(started, Duration::from_secs(30));
    c.finish(format!(
        "{cases} cases over 100 datasets, {rows} result rows, {where_seen} WHERE / {having_seen} HAVING predicates"
    ))
}

pub const FIG1B_SQL: &str = "SELECT latitude, longitude, AVG(magnitude), SUM(\"number of records\"), AVG(depth) \
FROM Earthquakes WHERE latitude < 49.5 AND latitude > 5.3 AND longitude < -24.5 AND longitude > -128.7 \
GROUP BY place";

pub fn sql_golden() -> Outcome {
    let got = to_sql_template(&fig1b(), &quake_schema()).map_err(|e| e.to_string())?;
    if got == FIG1B_SQL {
        Ok(got)
    } else {
        Err(format!("got {got:?}"))
    }
}

pub fn normalization_property() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = StdRng::seed_from_u64(31);
    let mut inserted = 0;
    for i in 0..500 {
        let mut seq = gen::random_sequence(&mut rng, "s", Role::Regular, "t", 2);
        seq.events[1].spec = gen::random_spec(&mut rng);
        let norm = normalize_sequence(&seq);
        inserted += norm.events.len().saturating_sub(2);
        for w in norm.events.windows(2) {
            let n = diff_ops(&w[0].spec, &w[1].spec).len();
            c.expect(n == 1, format!("pair {i}: consecutive events {n} operations apart"));
        }
        let first = |s: &SessionSequence| canonicalize(&s.events[0].spec);
        let last = |s: &SessionSequence| canonicalize(&s.events.last().unwrap().spec);
        c.expect(first(&norm) == first(&seq), format!("pair {i}: start changed"));
        c.expect(last(&norm) == last(&seq), format!("pair {i}: end changed"));
        let dwell = |s: &SessionSequence| s.events.iter().map(|e| e.dwell_ms).sum::<u64>();
        c.expect(dwell(&norm) == dwell(&seq), format!("pair {i}: total dwell changed"));
    }
    c.within(started, Duration::from_secs(10));
    c.finish(format!("500 pairs, {inserted} intermediate events inserted"))
}

pub fn threshold_property() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = StdRng::seed_from_u64(47);
    let (mut fills, mut trials) = (0, 0);
    for t in 0..300 {
        let count = rng.gen_range(1..6);
        let sessions = random_sessions(&mut rng, count, "t", 8);
        let mut graph = build_graph(&sessions, "t").map_err(|e| e.to_string())?;
        let ids: Vec<_> = graph.nodes().map(|n| n.node_id.clone()).collect();
        for _ in 0..rng.gen_range(0..4) {
            let id = &ids[rng.gen_range(0..ids.len())];
            graph.upvote(id).map_err(|e| e.to_string())?;
        }
        let threshold = [0, 1000, 3000, 5000][rng.gen_range(0..4)];
        let matched: Vec<_> = (0..rng.gen_range(1..=3))
            .map(|_| ids[rng.gen_range(0..ids.len())].clone())
            .collect();
        let m = rng.gen_range(0..=8);
        let ranked = rank_data_slices(&graph, &matched, m, threshold).map_err(|e| e.to_string())?;
        trials += 1;

        let reachable = multi_source_shortest_paths(&graph, &matched).map_err(|e| e.to_string())?;
        let candidates = graph
            .nodes()
            .filter(|n| n.effective_interestingness(threshold) > threshold && reachable.contains_key(&n.node_id))
            .count();
        let direct = ranked.iter().filter(|r| !r.via_fill).count();
        let filled = ranked.len() - direct;
        fills += usize::from(filled > 0);
        for r in ranked.iter().filter(|r| !r.via_fill) {
            c.expect(
                r.effective_interestingness > threshold,
                format!("trial {t}: node {} at or below T listed without fill", r.node_id),
            );
        }
        c.expect(
            direct == candidates.min(m),
            format!("trial {t}: {direct} direct of {candidates} candidates"),
        );
        let expected_fill = if candidates < m {
            (m - candidates).min(graph.node_count() - candidates)
        } else {
            0
        };
        c.expect(
            filled == expected_fill,
            format!("trial {t}: {filled} fills, expected {expected_fill}"),
        );
        c.expect(
            ranked.iter().skip_while(|r| !r.via_fill).all(|r| r.via_fill),
            format!("trial {t}: fill entries not at the tail"),
        );
    }
    c.expect(fills > 0 && fills < trials, "fill rule never or always engaged");
    c.within(started, Duration::from_secs(10));
    c.finish(format!("{trials} randomized graphs, fill engaged in {fills}"))
}

/// Graph with at least `nodes` nodes built from random sessions over the
/// earthquake attributes.
pub fn synthetic_graph(nodes: usize, seed: u64) -> DataSliceGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut graph = DataSliceGraph::new("t");
    let mut i = 0;
    while graph.node_count() < nodes {
        let role = if rng.gen_bool(0.3) { Role::Expert } else { Role::Regular };
        let seq = gen::random_sequence(&mut rng, &format!("s{i:05}"), role, "t", 20);
        graph.merge_sequence(&seq).expect("synthetic sessions merge");
        i += 1;
    }
    graph
}

pub fn scalability() -> Outcome {
    let started = Instant::now();
    let mut c = Checks::default();
    let mut rng = StdRng::seed_from_u64(71);
    let mut sessions = vec![fig3_sequence()];
    for s in random_sessions(&mut rng, 12, "outliers", 10) {
        sessions.push(s);
    }

    let mut docs = Vec::new();
    for rows in [100, 100_000] {
        let csv = gen::synthetic_quakes_csv(&mut rng, rows);
        let ds = load_dataset(csv.as_bytes(), quake_schema()).map_err(|e| e.to_string())?;
        c.expect(
            ds.row_count() == rows,
            format!("loaded {} of {rows} rows", ds.row_count()),
        );
        let mut graph = build_graph(&sessions, "outliers").map_err(|e| e.to_string())?;
        graph.bind_dataset(ds.schema()).map_err(|e| e.to_string())?;
        docs.push(save_graph(&graph));
    }
    c.expect(
        docs[0] == docs[1],
        "graphs differ between the 100-row and 100,000-row datasets",
    );

    let graph = synthetic_graph(1000, 3);
    let schema = quake_schema();
    let mut times = Vec::new();
    for _ in 0..41 {
        let spec = gen::random_spec(&mut rng);
        let t0 = Instant::now();
        let opts = RecommendOptions {
            schema: Some(&schema),
            user_pref: None,
            m: 5,
            threshold_ms: DEFAULT_THRESHOLD_MS,
        };
        let resp = recommend(&graph, &spec, opts).map_err(|e| e.to_string())?;
        times.push(t0.elapsed());
        c.expect(resp.recommendations.len() <= 5, "more than M recommendations");
    }
    times.sort();
    let median = times[times.len() / 2];
    c.expect(
        median < Duration::from_millis(50),
        format!("median recommend latency {median:?}"),
    );
    c.within(started, Duration::from_secs(60));
    c.finish(format!(
        "graphs identical across 100 and 100,000 rows; recommend median {median:?} over {} nodes",
        graph.node_count()
    ))
}

pub type Criterion = (&'static str, fn() -> Outcome);

pub const ALL: [Criterion; 10] = [
    ("fig3 golden: build, match, rank", fig3_golden),
    ("order independence: 120 build permutations", order_independence),
    ("edit-distance metric and axis-swap invariance", metric_suite),
    ("shortest paths equal brute-force enumeration", shortest_path_oracle),
    ("edge-weight law", edge_weight_law),
    ("evaluator equals row-at-a-time reference", query_oracle),
    ("fig1b SQL template text", sql_golden),
    ("normalization yields single-operation steps", normalization_property),
    ("threshold exclusion and fill engagement", threshold_property),
    ("tuple-count independence and recommend latency", scalability),
];
