use std::collections::BTreeSet;
use std::io::Read;

use crate::error::QueryError;

use super::schema::{ColumnDef, DatasetSchema};
use super::value::Value;

/// Immutable, column-major table bound to a schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: DatasetSchema,
    columns: Vec<Vec<Value>>,
    row_count: usize,
}

impl Dataset {
    /// Build from already-typed rows (row-major), checking every cell
    /// against the schema.
    pub fn from_rows(schema: DatasetSchema, rows: Vec<Vec<Value>>) -> Result<Self, QueryError> {
        schema.validate()?;
        let mut columns = vec![Vec::with_capacity(rows.len()); schema.columns.len()];
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != schema.columns.len() {
                return Err(QueryError::SchemaMismatch(format!(
                    "row {} has {} values, schema has {} columns",
                    r + 1,
                    row.len(),
                    schema.columns.len()
                )));
            }
            for (c, value) in row.into_iter().enumerate() {
                let def = &schema.columns[c];
                if !conforms(&value, def) {
                    return Err(QueryError::TypeError {
                        row: r + 1,
                        column: def.name.clone(),
                        text: value.to_string(),
                        expected: def.ty.name(),
                    });
                }
                columns[c].push(value);
            }
        }
        let row_count = columns.first().map_or(0, Vec::len);
        Ok(Dataset {
            schema,
            columns,
            row_count,
        })
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn column(&self, name: &str) -> Option<(&ColumnDef, &[Value])> {
        let i = self.schema.index_of(name)?;
        Some((&self.schema.columns[i], &self.columns[i]))
    }

    pub fn column_at(&self, column: usize) -> &[Value] {
        &self.columns[column]
    }

    pub fn value(&self, row: usize, column: usize) -> &Value {
        &self.columns[column][row]
    }
}

fn conforms(value: &Value, def: &ColumnDef) -> bool {
    use super::schema::ColumnType as T;
    matches!(
        (value, def.ty),
        (Value::Null, _)
            | (Value::Int(_), T::Int)
            | (Value::Float(_), T::Float)
            | (Value::Text(_), T::String)
            | (Value::Bool(_), T::Bool)
            | (Value::DateTime(_), T::Datetime)
    )
}

/// Read an RFC-4180 CSV with a header row. Header names must match the
/// schema's columns as a set; column order in the file is free.
pub fn load_dataset<R: Read>(source: R, schema: DatasetSchema) -> Result<Dataset, QueryError> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let expected: BTreeSet<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    let found: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    if found.len() != header.len() {
        return Err(QueryError::SchemaMismatch("duplicate column in header".into()));
    }
    let missing: Vec<_> = expected.difference(&found).collect();
    let extra: Vec<_> = found.difference(&expected).collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(QueryError::SchemaMismatch(format!(
            "missing columns {missing:?}, unexpected columns {extra:?}"
        )));
    }

    // file position -> schema position
    let positions: Vec<usize> = header
        .iter()
        .map(|h| schema.index_of(h).expect("checked above"))
        .collect();
    let mut columns: Vec<Vec<Value>> = vec![Vec::new(); schema.columns.len()];
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    while reader.read_record(&mut record)? {
        row += 1;
        for (i, text) in record.iter().enumerate() {
            let def = &schema.columns[positions[i]];
            let value = Value::parse(text, def.ty).ok_or_else(|| QueryError::TypeError {
                row,
                column: def.name.clone(),
                text: text.to_string(),
                expected: def.ty.name(),
            })?;
            columns[positions[i]].push(value);
        }
    }
    Ok(Dataset {
        schema,
        columns,
        row_count: row,
    })
}
