use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::QueryError;
use crate::field::{AggOp, FieldExpr};
use crate::spec::{Comparator, DataSpecification, FilterPredicate, Literal};

use super::dataset::Dataset;
use super::schema::ColumnType;
use super::value::{parse_datetime, Value};
use super::{group_by_fields, select_list};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultColumn {
    pub label: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

/// Column-labeled, row-major result of evaluating one data slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub columns: Vec<ResultColumn>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.label == label)
    }
}

#[derive(Debug, Clone, Copy)]
enum Compiled {
    Column(usize),
    Agg(AggOp, usize),
}

struct CompiledFilter {
    expr: Compiled,
    comparator: Comparator,
    operands: Vec<Value>,
}

fn column_index(ds: &Dataset, name: &str) -> Result<usize, QueryError> {
    ds.schema()
        .index_of(name)
        .ok_or_else(|| QueryError::UnresolvedField(name.to_string()))
}

fn compile(ds: &Dataset, f: &FieldExpr) -> Result<(Compiled, ColumnType), QueryError> {
    match f {
        FieldExpr::Simple(name) => {
            let i = column_index(ds, name)?;
            Ok((Compiled::Column(i), ds.schema().columns[i].ty))
        }
        FieldExpr::Aggregated(op, inner) => {
            let FieldExpr::Simple(name) = inner.as_ref() else {
                return Err(QueryError::Unsupported(f.render()));
            };
            let i = column_index(ds, name)?;
            let ty = ds.schema().columns[i].ty;
            let out = match op {
                AggOp::Sum | AggOp::Avg if !ty.is_numeric() => {
                    return Err(QueryError::TypeMismatch(format!(
                        "{} over {} column {name:?}",
                        op.keyword(),
                        ty.name()
                    )))
                }
                AggOp::Avg => ColumnType::Float,
                _ => ty,
            };
            Ok((Compiled::Agg(*op, i), out))
        }
        FieldExpr::Complex(..) => Err(QueryError::Unsupported(f.render())),
    }
}

fn literal_value(lit: &Literal, ty: ColumnType, field: &FieldExpr) -> Result<Value, QueryError> {
    let mismatch = || {
        QueryError::TypeMismatch(format!(
            "operand {} does not fit {} field {field}",
            lit.to_sql(),
            ty.name()
        ))
    };
    Ok(match (ty, lit) {
        (ColumnType::Int | ColumnType::Float, Literal::Int(i)) => Value::Int(*i),
        (ColumnType::Int | ColumnType::Float, Literal::Float(x)) => Value::Float(*x),
        (ColumnType::String, Literal::Text(s)) => Value::Text(s.clone()),
        (ColumnType::Bool, Literal::Bool(b)) => Value::Bool(*b),
        (ColumnType::Datetime, Literal::Text(s)) => Value::DateTime(parse_datetime(s).ok_or_else(mismatch)?),
        _ => return Err(mismatch()),
    })
}

fn compile_filter(ds: &Dataset, p: &FilterPredicate) -> Result<Option<CompiledFilter>, QueryError> {
    let (expr, ty) = compile(ds, &p.field)?;
    let Some(comparator) = p.comparator else {
        return Ok(None);
    };
    let operands = p
        .operands
        .iter()
        .map(|lit| literal_value(lit, ty, &p.field))
        .collect::<Result<_, _>>()?;
    Ok(Some(CompiledFilter {
        expr,
        comparator,
        operands,
    }))
}

fn holds(comparator: Comparator, v: &Value, operands: &[Value]) -> bool {
    use std::cmp::Ordering::*;
    if v.is_null() {
        return false;
    }
    match comparator {
        Comparator::Lt => v.cmp(&operands[0]) == Less,
        Comparator::Le => v.cmp(&operands[0]) != Greater,
        Comparator::Eq => v == &operands[0],
        Comparator::Ne => v != &operands[0],
        Comparator::Ge => v.cmp(&operands[0]) != Less,
        Comparator::Gt => v.cmp(&operands[0]) == Greater,
        Comparator::In => operands.contains(v),
        Comparator::Between => v >= &operands[0] && v <= &operands[1],
    }
}

/// Compensated (Neumaier) summation.
#[derive(Default)]
struct FloatSum {
    sum: f64,
    compensation: f64,
}

impl FloatSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn aggregate(op: AggOp, ty: ColumnType, values: &[Value], rows: &[usize]) -> Result<Value, QueryError> {
    let present = rows.iter().map(|&r| &values[r]).filter(|v| !v.is_null());
    Ok(match op {
        AggOp::Min => present.min().cloned().unwrap_or(Value::Null),
        AggOp::Max => present.max().cloned().unwrap_or(Value::Null),
        AggOp::Sum | AggOp::Avg => {
            let mut count = 0usize;
            let mut ints: i128 = 0;
            let mut floats = FloatSum::default();
            for v in present {
                count += 1;
                match v {
                    Value::Int(i) => ints += i128::from(*i),
                    Value::Float(x) => floats.add(*x),
                    _ => unreachable!("type-checked numeric column"),
                }
            }
            if count == 0 {
                Value::Null
            } else if op == AggOp::Avg {
                let total = if ty == ColumnType::Int {
                    ints as f64
                } else {
                    floats.value()
                };
                Value::Float(total / count as f64)
            } else if ty == ColumnType::Int {
                Value::Int(i64::try_from(ints).map_err(|_| QueryError::TypeMismatch("SUM overflows int".into()))?)
            } else {
                Value::Float(floats.value())
            }
        }
    })
}

fn compute(ds: &Dataset, expr: Compiled, rows: &[usize]) -> Result<Value, QueryError> {
    match expr {
        Compiled::Column(c) => Ok(rows.first().map_or(Value::Null, |&r| ds.value(r, c).clone())),
        Compiled::Agg(op, c) => aggregate(op, ds.schema().columns[c].ty, ds.column_at(c), rows),
    }
}

/// Evaluate a data slice: WHERE, then grouping, then aggregation and HAVING.
/// Groups come out sorted by key, nulls last; ungrouped rows keep table order.
pub fn evaluate(dataset: &Dataset, spec: &DataSpecification) -> Result<ResultTable, QueryError> {
    for f in spec.all_fields() {
        for attr in f.attributes() {
            column_index(dataset, attr)?;
        }
    }

    let mut outputs: Vec<(Compiled, ResultColumn)> = Vec::new();
    let selected = select_list(spec);
    if selected.is_empty() {
        for (i, c) in dataset.schema().columns.iter().enumerate() {
            outputs.push((
                Compiled::Column(i),
                ResultColumn {
                    label: c.name.clone(),
                    ty: c.ty,
                },
            ));
        }
    } else {
        for f in selected {
            let (expr, ty) = compile(dataset, f)?;
            outputs.push((expr, ResultColumn { label: f.render(), ty }));
        }
    }

    let mut row_filters = Vec::new();
    let mut group_filters = Vec::new();
    for p in &spec.filters {
        if let Some(cf) = compile_filter(dataset, p)? {
            if p.aggregated {
                group_filters.push(cf);
            } else {
                row_filters.push(cf);
            }
        }
    }

    let key_columns: Option<Vec<usize>> = match group_by_fields(spec) {
        None => None,
        Some(fields) => {
            let mut cols = Vec::new();
            for f in fields {
                if f.is_aggregated() {
                    return Err(QueryError::Unsupported(f.render()));
                }
                // complex grouping fields group by each of their attributes
                for attr in f.attributes() {
                    cols.push(column_index(dataset, attr)?);
                }
            }
            Some(cols)
        }
    };

    let surviving: Vec<usize> = (0..dataset.row_count())
        .filter(|&r| {
            row_filters.iter().all(|cf| match cf.expr {
                Compiled::Column(c) => holds(cf.comparator, dataset.value(r, c), &cf.operands),
                Compiled::Agg(..) => unreachable!("aggregated filters are HAVING-side"),
            })
        })
        .collect();

    let columns: Vec<ResultColumn> = outputs.iter().map(|(_, c)| c.clone()).collect();
    let Some(key_columns) = key_columns else {
        let rows = surviving
            .iter()
            .map(|&r| {
                outputs
                    .iter()
                    .map(|(e, _)| compute(dataset, *e, &[r]))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        return Ok(ResultTable { columns, rows });
    };

    let mut groups: BTreeMap<Vec<Value>, Vec<usize>> = BTreeMap::new();
    for &r in &surviving {
        let key = key_columns.iter().map(|&c| dataset.value(r, c).clone()).collect();
        groups.entry(key).or_default().push(r);
    }

    let mut rows = Vec::new();
    'groups: for members in groups.values() {
        for cf in &group_filters {
            let v = compute(dataset, cf.expr, members)?;
            if !holds(cf.comparator, &v, &cf.operands) {
                continue 'groups;
            }
        }
        rows.push(
            outputs
                .iter()
                .map(|(e, _)| compute(dataset, *e, members))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(ResultTable { columns, rows })
}
