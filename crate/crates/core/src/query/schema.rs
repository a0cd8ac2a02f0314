use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Int,
    Float,
    String,
    Datetime,
    Bool,
}

impl ColumnType {
    pub fn is_numeric(self) -> bool {
        matches!(self, ColumnType::Int | ColumnType::Float)
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Float => "float",
            ColumnType::String => "string",
            ColumnType::Datetime => "datetime",
            ColumnType::Bool => "bool",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Measure,
    Dimension,
    Latitude,
    Longitude,
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
    #[serde(default)]
    pub role: ColumnRole,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, ty: ColumnType, role: ColumnRole) -> Self {
        ColumnDef {
            name: name.into(),
            ty,
            role,
        }
    }
}

/// Schema sidecar: table name plus typed, role-tagged columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub name: String,
    pub columns: Vec<ColumnDef>,
}

impl DatasetSchema {
    pub fn new(name: impl Into<String>, columns: Vec<ColumnDef>) -> Result<Self, QueryError> {
        let schema = DatasetSchema {
            name: name.into(),
            columns,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.as_str()) {
                return Err(QueryError::InvalidSchema(format!("duplicate column {:?}", c.name)));
            }
        }
        for role in [ColumnRole::Latitude, ColumnRole::Longitude] {
            if self.columns.iter().filter(|c| c.role == role).count() > 1 {
                return Err(QueryError::InvalidSchema(format!("more than one {role:?} column")));
            }
        }
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_with_role(&self, role: ColumnRole) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.role == role)
    }

    pub fn from_json(text: &str) -> Result<Self, QueryError> {
        let schema: DatasetSchema = serde_json::from_str(text).map_err(|e| QueryError::InvalidSchema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }
}
