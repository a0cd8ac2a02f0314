//! Data specifications `(X, Y, Layers, Filters, Grouping)` and their
//! canonical abstraction used as graph-node identity.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::field::FieldExpr;

/// A typed filter operand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Literal {
    fn rank(&self) -> u8 {
        match self {
            Literal::Bool(_) => 0,
            Literal::Int(_) => 1,
            Literal::Float(_) => 2,
            Literal::Text(_) => 3,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Literal::Int(i) => Some(*i as f64),
            Literal::Float(f) => Some(*f),
            _ => None,
        }
    }

    /// SQL literal text.
    pub fn to_sql(&self) -> String {
        match self {
            Literal::Bool(true) => "TRUE".into(),
            Literal::Bool(false) => "FALSE".into(),
            Literal::Int(i) => i.to_string(),
            Literal::Float(f) => f.to_string(),
            Literal::Text(s) => format!("'{}'", s.replace('\'', "''")),
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Literal {}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Literal::Bool(a), Literal::Bool(b)) => a.cmp(b),
            (Literal::Int(a), Literal::Int(b)) => a.cmp(b),
            (Literal::Float(a), Literal::Float(b)) => a.total_cmp(b),
            (Literal::Text(a), Literal::Text(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<f64> for Literal {
    fn from(v: f64) -> Self {
        Literal::Float(v)
    }
}

impl From<i64> for Literal {
    fn from(v: i64) -> Self {
        Literal::Int(v)
    }
}

impl From<&str> for Literal {
    fn from(v: &str) -> Self {
        Literal::Text(v.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "in")]
    In,
    #[serde(rename = "between")]
    Between,
}

impl Comparator {
    pub const ALL: [Comparator; 8] = [
        Comparator::Lt,
        Comparator::Le,
        Comparator::Eq,
        Comparator::Ne,
        Comparator::Ge,
        Comparator::Gt,
        Comparator::In,
        Comparator::Between,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
            Comparator::In => "IN",
            Comparator::Between => "BETWEEN",
        }
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Comparator::Between => n == 2,
            Comparator::In => n >= 1,
            _ => n == 1,
        }
    }
}

/// One filter condition. A predicate without a comparator is a
/// placeholder: the filter is known to exist but carries no bounds yet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FilterPredicate {
    pub field: FieldExpr,
    pub comparator: Option<Comparator>,
    #[serde(default)]
    pub operands: Vec<Literal>,
    pub aggregated: bool,
}

impl FilterPredicate {
    pub fn new(field: FieldExpr, comparator: Comparator, operands: Vec<Literal>) -> Self {
        let aggregated = field.is_aggregated();
        FilterPredicate {
            field,
            comparator: Some(comparator),
            operands,
            aggregated,
        }
    }

    pub fn placeholder(field: FieldExpr) -> Self {
        let aggregated = field.is_aggregated();
        FilterPredicate {
            field,
            comparator: None,
            operands: Vec::new(),
            aggregated,
        }
    }

    pub fn is_placeholder(&self) -> bool {
        self.comparator.is_none()
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.aggregated != self.field.is_aggregated() {
            return Err(SpecError::Invalid(format!(
                "filter on {} has aggregated={} but the field {} an aggregation",
                self.field,
                self.aggregated,
                if self.field.is_aggregated() {
                    "contains"
                } else {
                    "has no"
                }
            )));
        }
        match self.comparator {
            None if !self.operands.is_empty() => Err(SpecError::Invalid(format!(
                "placeholder filter on {} carries operands",
                self.field
            ))),
            Some(c) if !c.arity_ok(self.operands.len()) => Err(SpecError::Invalid(format!(
                "comparator {} on {} takes a different number of operands than {}",
                c.symbol(),
                self.field,
                self.operands.len()
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FilterPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.comparator {
            None => write!(f, "{} ?", self.field),
            Some(c) => {
                let ops: Vec<String> = self.operands.iter().map(Literal::to_sql).collect();
                write!(f, "{} {} {}", self.field, c.symbol(), ops.join(", "))
            }
        }
    }
}

/// The five-part data specification a user builds and edits.
///
/// Layers, filters and grouping have set semantics; their stored order is
/// kept only for presentation (SQL text, UI), and equality ignores it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DataSpecification {
    #[serde(default)]
    pub x: Option<FieldExpr>,
    #[serde(default)]
    pub y: Option<FieldExpr>,
    #[serde(default)]
    pub layers: Vec<FieldExpr>,
    #[serde(default)]
    pub filters: Vec<FilterPredicate>,
    #[serde(default)]
    pub grouping: Vec<FieldExpr>,
}

impl DataSpecification {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_x(mut self, f: FieldExpr) -> Self {
        self.x = Some(f);
        self
    }

    pub fn with_y(mut self, f: FieldExpr) -> Self {
        self.y = Some(f);
        self
    }

    pub fn with_layer(mut self, f: FieldExpr) -> Self {
        self.layers.push(f);
        self
    }

    pub fn with_filter(mut self, p: FilterPredicate) -> Self {
        self.filters.push(p);
        self
    }

    pub fn with_group(mut self, f: FieldExpr) -> Self {
        self.grouping.push(f);
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if let (Some(x), Some(y)) = (&self.x, &self.y) {
            if x == y {
                return Err(SpecError::Invalid(format!("x and y are both {x}")));
            }
        }
        if let Some(dup) = first_duplicate(&self.layers) {
            return Err(SpecError::Invalid(format!("layer {dup} appears twice")));
        }
        if let Some(dup) = first_duplicate(&self.grouping) {
            return Err(SpecError::Invalid(format!("grouping field {dup} appears twice")));
        }
        if let Some(dup) = first_duplicate(&self.filters) {
            return Err(SpecError::Invalid(format!("filter {dup} appears twice")));
        }
        for p in &self.filters {
            p.validate()?;
            if p.is_placeholder() && self.filters.iter().filter(|q| q.field == p.field).count() > 1 {
                return Err(SpecError::Invalid(format!(
                    "placeholder filter on {} mixed with concrete predicates",
                    p.field
                )));
            }
        }
        Ok(())
    }

    /// Every field expression in the specification, filters included.
    pub fn all_fields(&self) -> impl Iterator<Item = &FieldExpr> {
        self.x
            .iter()
            .chain(self.y.iter())
            .chain(self.layers.iter())
            .chain(self.filters.iter().map(|p| &p.field))
            .chain(self.grouping.iter())
    }

    /// Filter predicates on the given descriptor.
    pub fn filters_on<'a>(&'a self, field: &'a FieldExpr) -> impl Iterator<Item = &'a FilterPredicate> {
        self.filters.iter().filter(move |p| &p.field == field)
    }

    pub fn has_filter_on(&self, field: &FieldExpr) -> bool {
        self.filters.iter().any(|p| &p.field == field)
    }

    /// Sorted, deduplicated filter descriptors.
    pub fn filter_descriptors(&self) -> BTreeSet<FieldExpr> {
        self.filters.iter().map(|p| p.field.clone()).collect()
    }
}

fn first_duplicate<T: Ord + Clone>(items: &[T]) -> Option<T> {
    let mut seen = BTreeSet::new();
    items.iter().find(|i| !seen.insert(*i)).cloned()
}

fn sorted<T: Ord + Clone>(items: &[T]) -> Vec<T> {
    let mut v = items.to_vec();
    v.sort();
    v
}

impl PartialEq for DataSpecification {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x
            && self.y == other.y
            && sorted(&self.layers) == sorted(&other.layers)
            && sorted(&self.filters) == sorted(&other.filters)
            && sorted(&self.grouping) == sorted(&other.grouping)
    }
}

impl Eq for DataSpecification {}

impl fmt::Display for DataSpecification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: &Option<FieldExpr>| v.as_ref().map_or("-".to_string(), |e| e.render());
        let list = |v: &[FieldExpr]| v.iter().map(|e| e.render()).collect::<Vec<_>>().join(", ");
        let filters = self
            .filters
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(", ");
        write!(
            f,
            "({}, {}, {{{}}}, {{{}}}, {{{}}})",
            opt(&self.x),
            opt(&self.y),
            list(&self.layers),
            filters,
            list(&self.grouping)
        )
    }
}

/// Canonical, constant-free form of a [`DataSpecification`]. Two events
/// are the same graph node exactly when their abstract specs are equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractSpec {
    pub x: Option<FieldExpr>,
    pub y: Option<FieldExpr>,
    pub layers: Vec<FieldExpr>,
    pub filters: Vec<FieldExpr>,
    pub grouping: Vec<FieldExpr>,
}

impl AbstractSpec {
    /// Deterministic text used for hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("abstract spec serializes")
    }

    /// X, Y and layers pooled into one set.
    pub fn select_set(&self) -> BTreeSet<FieldExpr> {
        self.x
            .iter()
            .chain(self.y.iter())
            .chain(self.layers.iter())
            .cloned()
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_none()
            && self.y.is_none()
            && self.layers.is_empty()
            && self.filters.is_empty()
            && self.grouping.is_empty()
    }

    /// A concrete specification whose filters are unbounded placeholders.
    pub fn embed(&self) -> DataSpecification {
        DataSpecification {
            x: self.x.clone(),
            y: self.y.clone(),
            layers: self.layers.clone(),
            filters: self.filters.iter().cloned().map(FilterPredicate::placeholder).collect(),
            grouping: self.grouping.clone(),
        }
    }

    /// All attribute names referenced.
    pub fn attributes(&self) -> BTreeSet<&str> {
        self.x
            .iter()
            .chain(self.y.iter())
            .chain(self.layers.iter())
            .chain(self.filters.iter())
            .chain(self.grouping.iter())
            .flat_map(FieldExpr::attributes)
            .collect()
    }
}

impl fmt::Display for AbstractSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: &Option<FieldExpr>| v.as_ref().map_or("-".to_string(), |e| e.render());
        let list = |v: &[FieldExpr]| v.iter().map(|e| e.render()).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "({}, {}, {{{}}}, {{{}}}, {{{}}})",
            opt(&self.x),
            opt(&self.y),
            list(&self.layers),
            list(&self.filters),
            list(&self.grouping)
        )
    }
}

/// Reduce a specification to its abstract node identity: filter
/// predicates collapse to their field, every list is sorted and deduplicated.
pub fn canonicalize(spec: &DataSpecification) -> AbstractSpec {
    let set = |v: &[FieldExpr]| v.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    AbstractSpec {
        x: spec.x.clone(),
        y: spec.y.clone(),
        layers: set(&spec.layers),
        filters: spec.filter_descriptors().into_iter().collect(),
        grouping: set(&spec.grouping),
    }
}
