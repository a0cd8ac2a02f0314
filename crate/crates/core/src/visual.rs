use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::FieldExpr;

/// One layer field bound to a visual cue such as `color` or `size`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Encoding {
    pub field: FieldExpr,
    pub cue: String,
}

/// Presentation half of a visualization. Opaque to the algorithms apart
/// from the chart type and which fields it encodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisualSpec {
    pub chart_type: String,
    #[serde(default)]
    pub encodings: Vec<Encoding>,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

impl VisualSpec {
    pub fn new(chart_type: impl Into<String>) -> Self {
        VisualSpec {
            chart_type: chart_type.into(),
            ..Default::default()
        }
    }

    pub fn encode(mut self, field: FieldExpr, cue: impl Into<String>) -> Self {
        self.encodings.push(Encoding { field, cue: cue.into() });
        self
    }

    pub fn cue_for(&self, field: &FieldExpr) -> Option<&str> {
        self.encodings
            .iter()
            .find(|e| &e.field == field)
            .map(|e| e.cue.as_str())
    }

    /// Copy keeping only encodings whose field satisfies `keep`.
    pub fn restricted_to(&self, keep: impl Fn(&FieldExpr) -> bool) -> VisualSpec {
        VisualSpec {
            chart_type: self.chart_type.clone(),
            encodings: self.encodings.iter().filter(|e| keep(&e.field)).cloned().collect(),
            extra: self.extra.clone(),
        }
    }
}
