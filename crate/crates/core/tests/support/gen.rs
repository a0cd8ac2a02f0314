use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use dataslicer_core::query::{ColumnDef, ColumnRole, ColumnType, Dataset, DatasetSchema, Value};
use dataslicer_core::visual::VisualSpec;
use dataslicer_core::{
    canonicalize, AbstractSpec, Comparator, DataSpecification, FieldExpr, FilterPredicate, Role, SessionEvent,
    SessionSequence,
};

pub const NAMES: [&str; 7] = [
    "latitude",
    "longitude",
    "magnitude",
    "depth",
    "place",
    "time",
    "number of records",
];
const AGGS: [&str; 4] = ["SUM", "MIN", "MAX", "AVG"];

pub fn field(s: &str) -> FieldExpr {
    FieldExpr::parse(s).unwrap()
}

pub fn random_field(rng: &mut StdRng) -> FieldExpr {
    let name = NAMES[rng.gen_range(0..NAMES.len())];
    if rng.gen_bool(0.4) {
        field(&format!("{}({name})", AGGS[rng.gen_range(0..AGGS.len())]))
    } else {
        field(name)
    }
}

fn some_fields(rng: &mut StdRng, max: usize) -> Vec<FieldExpr> {
    let n = rng.gen_range(0..=max);
    let mut v: Vec<FieldExpr> = (0..n).map(|_| random_field(rng)).collect();
    v.sort();
    v.dedup();
    v
}

pub fn random_spec(rng: &mut StdRng) -> DataSpecification {
    let x = rng.gen_bool(0.7).then(|| random_field(rng));
    let y = rng
        .gen_bool(0.6)
        .then(|| random_field(rng))
        .filter(|y| Some(y) != x.as_ref());
    let filters = some_fields(rng, 3)
        .into_iter()
        .map(|f| FilterPredicate::new(f, Comparator::Gt, vec![rng.gen_range(0i64..10).into()]))
        .collect();
    DataSpecification {
        x,
        y,
        layers: some_fields(rng, 4),
        filters,
        grouping: some_fields(rng, 2),
    }
}

pub fn random_abstract(rng: &mut StdRng) -> AbstractSpec {
    canonicalize(&random_spec(rng))
}

/// Small random edit of `spec`: one to three field additions or removals.
pub fn perturb(rng: &mut StdRng, spec: &DataSpecification) -> DataSpecification {
    let mut s = spec.clone();
    for _ in 0..rng.gen_range(1..=3) {
        let f = random_field(rng);
        match rng.gen_range(0..4) {
            0 => {
                if let Some(i) = s.layers.iter().position(|l| l == &f) {
                    s.layers.remove(i);
                } else if s.x.as_ref() != Some(&f) && s.y.as_ref() != Some(&f) {
                    s.layers.push(f);
                }
            }
            1 => {
                if s.has_filter_on(&f) {
                    s.filters.retain(|p| p.field != f);
                } else {
                    s.filters.push(FilterPredicate::new(
                        f,
                        Comparator::Lt,
                        vec![rng.gen_range(0i64..10).into()],
                    ));
                }
            }
            2 => {
                if let Some(i) = s.grouping.iter().position(|g| g == &f) {
                    s.grouping.remove(i);
                } else {
                    s.grouping.push(f);
                }
            }
            _ => {
                if s.y.as_ref() != Some(&f) && !s.layers.contains(&f) {
                    s.x = if s.x.is_some() && rng.gen_bool(0.3) {
                        None
                    } else {
                        Some(f)
                    };
                }
            }
        }
    }
    s
}

pub fn random_sequence(rng: &mut StdRng, session_id: &str, role: Role, task: &str, len: usize) -> SessionSequence {
    let mut spec = random_spec(rng);
    let mut events = Vec::with_capacity(len);
    let mut ts = rng.gen_range(0i64..1_000_000);
    for _ in 0..len {
        events.push(SessionEvent {
            spec: spec.clone(),
            visual: VisualSpec::new(["table", "bar", "map-scatter"][rng.gen_range(0..3)]),
            dwell_ms: rng.gen_range(0..8000),
            timestamp_ms: ts,
        });
        ts += rng.gen_range(0..5000);
        spec = if rng.gen_bool(0.15) {
            random_spec(rng)
        } else {
            perturb(rng, &spec)
        };
    }
    SessionSequence {
        session_id: session_id.to_string(),
        role,
        task_type: task.to_string(),
        events,
    }
}

pub fn random_sessions(rng: &mut StdRng, n: usize, task: &str, max_len: usize) -> Vec<SessionSequence> {
    (0..n)
        .map(|i| {
            let role = if rng.gen_bool(0.3) { Role::Expert } else { Role::Regular };
            let len = rng.gen_range(1..=max_len);
            random_sequence(rng, &format!("s{i:04}"), role, task, len)
        })
        .collect()
}

/// Four-column table for the evaluator oracle: `g` (text) and `h` (int)
/// keys, `v` (float) and `n` (int) measures, with scattered nulls.
pub fn oracle_schema() -> DatasetSchema {
    DatasetSchema::new(
        "t",
        vec![
            ColumnDef::new("g", ColumnType::String, ColumnRole::Dimension),
            ColumnDef::new("h", ColumnType::Int, ColumnRole::Dimension),
            ColumnDef::new("v", ColumnType::Float, ColumnRole::Measure),
            ColumnDef::new("n", ColumnType::Int, ColumnRole::Measure),
        ],
    )
    .unwrap()
}

pub fn oracle_dataset(rng: &mut StdRng, max_rows: usize) -> Dataset {
    let rows = rng.gen_range(0..=max_rows);
    let groups = rng.gen_range(1..=5);
    let data = (0..rows)
        .map(|_| {
            let null = |rng: &mut StdRng| rng.gen_bool(0.08);
            vec![
                if null(rng) {
                    Value::Null
                } else {
                    Value::Text(format!("k{}", rng.gen_range(0..groups)))
                },
                if null(rng) {
                    Value::Null
                } else {
                    Value::Int(rng.gen_range(0..3))
                },
                if null(rng) {
                    Value::Null
                } else {
                    Value::Float(rng.gen_range(-1000.0..1000.0))
                },
                if null(rng) {
                    Value::Null
                } else {
                    Value::Int(rng.gen_range(-50..50))
                },
            ]
        })
        .collect();
    Dataset::from_rows(oracle_schema(), data).unwrap()
}

const COMPARATORS: [Comparator; 6] = [
    Comparator::Lt,
    Comparator::Le,
    Comparator::Eq,
    Comparator::Ne,
    Comparator::Ge,
    Comparator::Gt,
];

fn oracle_predicate(rng: &mut StdRng) -> FilterPredicate {
    let cmp = |rng: &mut StdRng| COMPARATORS[rng.gen_range(0..COMPARATORS.len())];
    match rng.gen_range(0..8) {
        0 => FilterPredicate::new(field("v"), cmp(rng), vec![rng.gen_range(-800.0..800.0).into()]),
        1 => FilterPredicate::new(field("n"), cmp(rng), vec![rng.gen_range(-40i64..40).into()]),
        2 => FilterPredicate::new(field("g"), Comparator::In, vec!["k0".into(), "k2".into()]),
        3 => FilterPredicate::new(field("v"), Comparator::Between, vec![(-500.0).into(), 500.0.into()]),
        4 => FilterPredicate::new(field("h"), cmp(rng), vec![1.into()]),
        5 => {
            let agg = ["SUM", "MIN", "MAX", "AVG"][rng.gen_range(0..4)];
            FilterPredicate::new(
                field(&format!("{agg}(v)")),
                cmp(rng),
                vec![rng.gen_range(-500.0..500.0).into()],
            )
        }
        6 => {
            let agg = ["SUM", "MIN", "MAX", "AVG"][rng.gen_range(0..4)];
            FilterPredicate::new(
                field(&format!("{agg}(n)")),
                cmp(rng),
                vec![rng.gen_range(-60i64..60).into()],
            )
        }
        _ => FilterPredicate::placeholder(field("n")),
    }
}

pub fn oracle_spec(rng: &mut StdRng) -> DataSpecification {
    let keys = ["g", "h"];
    let measure = |rng: &mut StdRng| {
        let agg = ["SUM", "MIN", "MAX", "AVG"][rng.gen_range(0..4)];
        let col = ["v", "n"][rng.gen_range(0..2)];
        field(&format!("{agg}({col})"))
    };
    let mut spec = DataSpecification::new();
    if rng.gen_bool(0.6) {
        spec.x = Some(field(keys[rng.gen_range(0..2)]));
    }
    if rng.gen_bool(0.5) {
        spec.y = Some(if rng.gen_bool(0.7) {
            measure(rng)
        } else {
            field(["v", "n"][rng.gen_range(0..2)])
        });
    }
    for _ in 0..rng.gen_range(0..4) {
        let f = if rng.gen_bool(0.75) {
            measure(rng)
        } else {
            field(["g", "h", "v", "n"][rng.gen_range(0..4)])
        };
        if !spec.layers.contains(&f) && spec.x.as_ref() != Some(&f) && spec.y.as_ref() != Some(&f) {
            spec.layers.push(f);
        }
    }
    for _ in 0..rng.gen_range(0..4) {
        spec.filters.push(oracle_predicate(rng));
    }
    let mut grouping: Vec<&str> = keys.iter().copied().filter(|_| rng.gen_bool(0.35)).collect();
    grouping.shuffle(rng);
    spec.grouping = grouping.into_iter().map(field).collect();
    spec
}

const PLACES: [&str; 6] = ["Guatemala", "Chile", "Japan", "Ecuador", "Alaska", "Tonga"];

/// Earthquake-shaped CSV text with `rows` data rows.
pub fn synthetic_quakes_csv(rng: &mut StdRng, rows: usize) -> String {
    let mut out = String::from("time,latitude,longitude,depth,magnitude,place,number of records\n");
    for i in 0..rows {
        out.push_str(&format!(
            "2016-{:02}-{:02}T{:02}:{:02}:00,{:.3},{:.3},{:.1},{:.1},{},1\n",
            i % 12 + 1,
            i % 28 + 1,
            i % 24,
            i % 60,
            rng.gen_range(-60.0..60.0),
            rng.gen_range(-180.0..180.0),
            rng.gen_range(0.0..700.0),
            rng.gen_range(2.5..9.0),
            PLACES[rng.gen_range(0..PLACES.len())],
        ));
    }
    out
}
