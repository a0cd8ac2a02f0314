//! Row-at-a-time evaluator used as an oracle. Deliberately naive: linear
//! group lookup, plain summation, no shared code with the real engine
//! beyond the data containers.

use std::cmp::Ordering;

use dataslicer_core::query::{Dataset, Value};
use dataslicer_core::{AggOp, Comparator, DataSpecification, FieldExpr, FilterPredicate, Literal};

fn cmp_values(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Null, Value::Null) => Ordering::Equal,
        (Value::Null, _) => Ordering::Greater,
        (_, Value::Null) => Ordering::Less,
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        _ => {
            let x = a.as_f64().expect("numeric");
            let y = b.as_f64().expect("numeric");
            x.partial_cmp(&y).unwrap()
        }
    }
}

fn literal(l: &Literal) -> Value {
    match l {
        Literal::Int(i) => Value::Int(*i),
        Literal::Float(x) => Value::Float(*x),
        Literal::Text(s) => Value::Text(s.clone()),
        Literal::Bool(b) => Value::Bool(*b),
    }
}

fn test(p: &FilterPredicate, v: &Value) -> bool {
    if matches!(v, Value::Null) {
        return false;
    }
    let ops: Vec<Value> = p.operands.iter().map(literal).collect();
    let c = |i: usize| cmp_values(v, &ops[i]);
    match p.comparator.expect("placeholders are skipped") {
        Comparator::Lt => c(0) == Ordering::Less,
        Comparator::Le => c(0) != Ordering::Greater,
        Comparator::Eq => c(0) == Ordering::Equal,
        Comparator::Ne => c(0) != Ordering::Equal,
        Comparator::Ge => c(0) != Ordering::Less,
        Comparator::Gt => c(0) == Ordering::Greater,
        Comparator::In => (0..ops.len()).any(|i| c(i) == Ordering::Equal),
        Comparator::Between => c(0) != Ordering::Less && c(1) != Ordering::Greater,
    }
}

fn col(ds: &Dataset, name: &str) -> usize {
    ds.schema().index_of(name).expect("resolved")
}

fn simple_name(f: &FieldExpr) -> &str {
    match f {
        FieldExpr::Simple(n) => n,
        _ => panic!("expected a simple field"),
    }
}

fn agg(ds: &Dataset, op: AggOp, name: &str, rows: &[usize]) -> Value {
    let c = col(ds, name);
    let vals: Vec<&Value> = rows
        .iter()
        .map(|&r| ds.value(r, c))
        .filter(|v| !matches!(v, Value::Null))
        .collect();
    if vals.is_empty() {
        return Value::Null;
    }
    match op {
        AggOp::Min => (*vals.iter().min_by(|a, b| cmp_values(a, b)).unwrap()).clone(),
        AggOp::Max => (*vals.iter().max_by(|a, b| cmp_values(a, b)).unwrap()).clone(),
        AggOp::Sum => match vals[0] {
            Value::Int(_) => Value::Int(vals.iter().map(|v| if let Value::Int(i) = v { *i } else { 0 }).sum()),
            _ => Value::Float(vals.iter().map(|v| v.as_f64().unwrap()).sum()),
        },
        AggOp::Avg => Value::Float(vals.iter().map(|v| v.as_f64().unwrap()).sum::<f64>() / vals.len() as f64),
    }
}

fn value_of(ds: &Dataset, f: &FieldExpr, rows: &[usize]) -> Value {
    match f {
        FieldExpr::Simple(n) => ds.value(rows[0], col(ds, n)).clone(),
        FieldExpr::Aggregated(op, inner) => agg(ds, *op, simple_name(inner), rows),
        FieldExpr::Complex(..) => panic!("complex fields are not generated"),
    }
}

pub fn reference_evaluate(ds: &Dataset, spec: &DataSpecification) -> Vec<Vec<Value>> {
    let mut selected: Vec<&FieldExpr> = Vec::new();
    selected.extend(spec.y.iter());
    selected.extend(spec.x.iter());
    selected.extend(spec.layers.iter());

    let mut kept = Vec::new();
    for r in 0..ds.row_count() {
        let ok = spec
            .filters
            .iter()
            .filter(|p| !p.aggregated && p.comparator.is_some())
            .all(|p| test(p, ds.value(r, col(ds, simple_name(&p.field)))));
        if ok {
            kept.push(r);
        }
    }

    let all_columns: Vec<FieldExpr> = ds.schema().columns.iter().map(|c| FieldExpr::simple(&c.name)).collect();
    if selected.is_empty() {
        selected = all_columns.iter().collect();
    }

    let aggregating = selected.iter().any(|f| f.is_aggregated())
        || spec.filters.iter().any(|p| p.aggregated && p.comparator.is_some());
    let keys: Vec<&str> = if !spec.grouping.is_empty() {
        spec.grouping.iter().map(simple_name).collect()
    } else if aggregating {
        spec.x
            .iter()
            .chain(spec.y.iter())
            .filter(|f| !f.is_aggregated())
            .map(simple_name)
            .collect()
    } else {
        return kept
            .iter()
            .map(|&r| selected.iter().map(|f| value_of(ds, f, &[r])).collect())
            .collect();
    };

    let mut groups: Vec<(Vec<Value>, Vec<usize>)> = Vec::new();
    for &r in &kept {
        let key: Vec<Value> = keys.iter().map(|k| ds.value(r, col(ds, k)).clone()).collect();
        let same = |other: &Vec<Value>| key.iter().zip(other).all(|(a, b)| cmp_values(a, b) == Ordering::Equal);
        match groups.iter_mut().find(|(k, _)| same(k)) {
            Some((_, rows)) => rows.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|(a, _), (b, _)| {
        a.iter()
            .zip(b)
            .map(|(x, y)| cmp_values(x, y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    });

    groups
        .iter()
        .filter(|(_, rows)| {
            spec.filters
                .iter()
                .filter(|p| p.aggregated && p.comparator.is_some())
                .all(|p| test(p, &value_of(ds, &p.field, rows)))
        })
        .map(|(_, rows)| selected.iter().map(|f| value_of(ds, f, rows)).collect())
        .collect()
}

pub fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0),
        _ => cmp_values(a, b) == Ordering::Equal && std::mem::discriminant(a) == std::mem::discriminant(b),
    }
}

pub fn tables_match(got: &[Vec<Value>], want: &[Vec<Value>]) -> bool {
    got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|(g, w)| g.len() == w.len() && g.iter().zip(w).all(|(a, b)| close(a, b)))
}
