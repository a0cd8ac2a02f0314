use crate::error::QueryError;
use crate::field::FieldExpr;
use crate::spec::{Comparator, DataSpecification, FilterPredicate};

use super::schema::DatasetSchema;
use super::{group_by_fields, select_list};

/// Double-quote identifiers containing whitespace.
pub fn quote_identifier(name: &str) -> String {
    if name.chars().any(char::is_whitespace) {
        format!("\"{}\"", name.replace('"', "\"\""))
    } else {
        name.to_string()
    }
}

fn field_sql(f: &FieldExpr) -> String {
    match f {
        FieldExpr::Simple(name) => quote_identifier(name),
        FieldExpr::Aggregated(op, inner) => format!("{}({})", op.keyword(), field_sql(inner)),
        FieldExpr::Complex(op, l, r) => format!("({}{}{})", field_sql(l), op.symbol(), field_sql(r)),
    }
}

fn predicate_sql(p: &FilterPredicate) -> String {
    let lhs = field_sql(&p.field);
    match p.comparator {
        None => format!("{lhs} ?"),
        Some(Comparator::In) => {
            let ops: Vec<String> = p.operands.iter().map(|o| o.to_sql()).collect();
            format!("{lhs} IN ({})", ops.join(", "))
        }
        Some(Comparator::Between) => format!(
            "{lhs} BETWEEN {} AND {}",
            p.operands[0].to_sql(),
            p.operands[1].to_sql()
        ),
        Some(c) => format!("{lhs} {} {}", c.symbol(), p.operands[0].to_sql()),
    }
}

/// SQL text for a specification over a schema, after checking every
/// referenced attribute exists.
pub fn to_sql_template(spec: &DataSpecification, schema: &DatasetSchema) -> Result<String, QueryError> {
    for f in spec.all_fields() {
        for attr in f.attributes() {
            if schema.column(attr).is_none() {
                return Err(QueryError::UnresolvedField(attr.to_string()));
            }
        }
    }
    Ok(sql_template_unchecked(spec, &schema.name))
}

/// SQL text without resolving attributes against a schema.
pub fn sql_template_unchecked(spec: &DataSpecification, table: &str) -> String {
    let select: Vec<String> = select_list(spec).into_iter().map(field_sql).collect();
    let mut sql = format!(
        "SELECT {} FROM {}",
        if select.is_empty() {
            "*".to_string()
        } else {
            select.join(", ")
        },
        quote_identifier(table)
    );

    let (having, wher): (Vec<_>, Vec<_>) = spec.filters.iter().partition(|p| p.aggregated);
    if !wher.is_empty() {
        let preds: Vec<String> = wher.into_iter().map(predicate_sql).collect();
        sql.push_str(" WHERE ");
        sql.push_str(&preds.join(" AND "));
    }
    if let Some(keys) = group_by_fields(spec).filter(|k| !k.is_empty()) {
        let keys: Vec<String> = keys.into_iter().map(field_sql).collect();
        sql.push_str(" GROUP BY ");
        sql.push_str(&keys.join(", "));
    }
    if !having.is_empty() {
        let preds: Vec<String> = having.into_iter().map(predicate_sql).collect();
        sql.push_str(" HAVING ");
        sql.push_str(&preds.join(" AND "));
    }
    sql
}
