//! Binding specifications to data: CSV loading, SQL-template text and
//! in-memory evaluation of a data slice.
//!
//! Both the SQL text and the evaluator follow the same clause rules:
//!
//! * SELECT lists Y, X, then the layers in their stored order.
//! * WHERE holds predicates on non-aggregated fields, HAVING the rest.
//! * GROUP BY is the grouping specification when it is non-empty;
//!   otherwise, when anything is aggregated, the non-aggregated X/Y fields.
//! * A non-aggregated SELECT field that is not a group key takes the value
//!   of the first row of its group.

mod dataset;
mod eval;
mod schema;
mod sql;
mod value;

pub use dataset::{load_dataset, Dataset};
pub use eval::{evaluate, ResultColumn, ResultTable};
pub use schema::{ColumnDef, ColumnRole, ColumnType, DatasetSchema};
pub use sql::{quote_identifier, sql_template_unchecked, to_sql_template};
pub use value::{parse_datetime, Value};

use crate::field::FieldExpr;
use crate::spec::DataSpecification;

/// SELECT list in emission order.
pub fn select_list(spec: &DataSpecification) -> Vec<&FieldExpr> {
    spec.y.iter().chain(spec.x.iter()).chain(spec.layers.iter()).collect()
}

/// True when the slice aggregates rows (an aggregated SELECT field or an
/// aggregated filter).
pub fn is_aggregating(spec: &DataSpecification) -> bool {
    select_list(spec).iter().any(|f| f.is_aggregated())
        || spec.filters.iter().any(|p| p.aggregated && !p.is_placeholder())
}

/// GROUP BY fields in emission order; `None` when rows are not grouped.
pub fn group_by_fields(spec: &DataSpecification) -> Option<Vec<&FieldExpr>> {
    if !spec.grouping.is_empty() {
        return Some(spec.grouping.iter().collect());
    }
    if is_aggregating(spec) {
        return Some(
            spec.x
                .iter()
                .chain(spec.y.iter())
                .filter(|f| !f.is_aggregated())
                .collect(),
        );
    }
    None
}
