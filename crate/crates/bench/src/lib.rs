//! Deterministic synthetic workloads: session walks over an earthquake-like
//! schema, graphs of a requested size, and CSV tables.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dataslicer_core::query::{ColumnDef, ColumnRole, ColumnType, DatasetSchema};
use dataslicer_core::{
    Comparator, DataSliceGraph, DataSpecification, FieldExpr, FilterPredicate, Role, SessionEvent, SessionSequence,
    VisualSpec,
};

const MEASURES: [&str; 3] = ["magnitude", "depth", "number of records"];
const DIMENSIONS: [&str; 4] = ["latitude", "longitude", "place", "time"];
const AGGS: [&str; 4] = ["AVG", "SUM", "MIN", "MAX"];
const PLACES: [&str; 6] = ["Chile", "Japan", "Alaska", "Ecuador", "Fiji", "Tonga"];

pub fn schema() -> DatasetSchema {
    DatasetSchema::new(
        "Earthquakes",
        vec![
            ColumnDef::new("time", ColumnType::Datetime, ColumnRole::Dimension),
            ColumnDef::new("latitude", ColumnType::Float, ColumnRole::Latitude),
            ColumnDef::new("longitude", ColumnType::Float, ColumnRole::Longitude),
            ColumnDef::new("depth", ColumnType::Float, ColumnRole::Measure),
            ColumnDef::new("magnitude", ColumnType::Float, ColumnRole::Measure),
            ColumnDef::new("place", ColumnType::String, ColumnRole::Dimension),
            ColumnDef::new("number of records", ColumnType::Int, ColumnRole::Measure),
        ],
    )
    .expect("static schema")
}

fn field(text: &str) -> FieldExpr {
    FieldExpr::parse(text).expect("generated fields parse")
}

fn aggregate(rng: &mut StdRng) -> FieldExpr {
    let m = MEASURES[rng.gen_range(0..MEASURES.len())];
    field(&format!("{}({m})", AGGS[rng.gen_range(0..AGGS.len())]))
}

fn dimension(rng: &mut StdRng) -> FieldExpr {
    field(DIMENSIONS[rng.gen_range(0..DIMENSIONS.len())])
}

fn filter(rng: &mut StdRng) -> FilterPredicate {
    let f = field(MEASURES[rng.gen_range(0..2)]);
    let bound = rng.gen_range(0..10);
    FilterPredicate::new(f, Comparator::Gt, vec![bound.into()])
}

pub fn random_spec(rng: &mut StdRng) -> DataSpecification {
    let mut spec = DataSpecification::new().with_x(dimension(rng));
    if rng.gen_bool(0.5) {
        spec = spec.with_y(aggregate(rng));
    }
    for _ in 0..rng.gen_range(0..3) {
        spec = spec.with_layer(aggregate(rng));
    }
    if rng.gen_bool(0.5) {
        spec = spec.with_group(field("place"));
    }
    spec.layers.dedup();
    spec
}

/// One toggle of a layer, filter or grouping field.
pub fn step(rng: &mut StdRng, spec: &DataSpecification) -> DataSpecification {
    let mut next = spec.clone();
    match rng.gen_range(0..3) {
        0 => {
            let f = aggregate(rng);
            match next.layers.iter().position(|l| *l == f) {
                Some(i) => {
                    next.layers.remove(i);
                }
                None => next.layers.push(f),
            }
        }
        1 => {
            let p = filter(rng);
            match next.filters.iter().position(|q| q.field == p.field) {
                Some(i) => {
                    next.filters.remove(i);
                }
                None => next.filters.push(p),
            }
        }
        _ => {
            let g = dimension(rng);
            match next.grouping.iter().position(|q| *q == g) {
                Some(i) => {
                    next.grouping.remove(i);
                }
                None => next.grouping.push(g),
            }
        }
    }
    next
}

pub fn session(rng: &mut StdRng, id: &str, task: &str, len: usize) -> SessionSequence {
    let role = if rng.gen_bool(0.3) { Role::Expert } else { Role::Regular };
    let mut spec = random_spec(rng);
    let mut ts = 0;
    let events = (0..len)
        .map(|_| {
            let ev = SessionEvent {
                spec: spec.clone(),
                visual: VisualSpec::new("table"),
                dwell_ms: rng.gen_range(0..8000),
                timestamp_ms: ts,
            };
            ts += 1000;
            spec = step(rng, &spec);
            ev
        })
        .collect();
    SessionSequence {
        session_id: id.to_string(),
        role,
        task_type: task.to_string(),
        events,
    }
}

/// Merge random sessions until the graph holds at least `nodes` nodes.
pub fn graph(nodes: usize, seed: u64) -> DataSliceGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut g = DataSliceGraph::new("bench");
    let mut i = 0;
    while g.node_count() < nodes {
        g.merge_sequence(&session(&mut rng, &format!("s{i:05}"), "bench", 20))
            .expect("generated sessions merge");
        i += 1;
    }
    g
}

pub fn queries(n: usize, seed: u64) -> Vec<DataSpecification> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| random_spec(&mut rng)).collect()
}

pub fn csv(rows: usize, seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = String::from("time,latitude,longitude,depth,magnitude,place,number of records\n");
    for i in 0..rows {
        out.push_str(&format!(
            "2016-{:02}-{:02}T00:00:00,{:.3},{:.3},{:.1},{:.1},{},1\n",
            i % 12 + 1,
            i % 28 + 1,
            rng.gen_range(-60.0..60.0),
            rng.gen_range(-180.0..180.0),
            rng.gen_range(0.0..700.0),
            rng.gen_range(2.5..9.0),
            PLACES[rng.gen_range(0..PLACES.len())],
        ));
    }
    out
}
