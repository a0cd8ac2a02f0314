use serde::Serialize;

use crate::error::{Error, GraphError};
use crate::field::FieldExpr;
use crate::graph::{DataSliceGraph, NodeId, SliceNode};
use crate::matcher::{match_data_slices, MatchResult};
use crate::query::{sql_template_unchecked, to_sql_template, ColumnRole, ColumnType, DatasetSchema};
use crate::ranker::{rank_data_slices, RankedRecommendation};
use crate::spec::{canonicalize, AbstractSpec, DataSpecification, FilterPredicate};
use crate::visual::VisualSpec;

pub const DEFAULT_M: usize = 5;

/// Cues handed to layers, in order, when a chart is built from the rule table.
pub const DEFAULT_CUES: [&str; 5] = ["color", "size", "label", "shape", "detail"];

/// Table name used in SQL text when no dataset is bound.
pub const DEFAULT_TABLE: &str = "data";

/// Concrete specification for a node: its fields verbatim, each filter
/// descriptor filled with the current session's predicates on that field
/// or, failing that, an unbounded placeholder.
pub fn contextualize(node: &AbstractSpec, current: &DataSpecification) -> DataSpecification {
    let mut filters = Vec::new();
    for field in &node.filters {
        let copied: Vec<FilterPredicate> = current
            .filters_on(field)
            .filter(|p| !p.is_placeholder())
            .cloned()
            .collect();
        if copied.is_empty() {
            filters.push(FilterPredicate::placeholder(field.clone()));
        } else {
            filters.extend(copied);
        }
    }
    DataSpecification {
        x: node.x.clone(),
        y: node.y.clone(),
        layers: node.layers.clone(),
        filters,
        grouping: node.grouping.clone(),
    }
}

fn attribute_role(name: &str, schema: Option<&DatasetSchema>) -> (ColumnRole, Option<ColumnType>) {
    if let Some(col) = schema.and_then(|s| s.column(name)) {
        return (col.role, Some(col.ty));
    }
    let lower = name.to_ascii_lowercase();
    let role = match lower.as_str() {
        "lat" | "latitude" => ColumnRole::Latitude,
        "lon" | "lng" | "long" | "longitude" => ColumnRole::Longitude,
        _ => ColumnRole::None,
    };
    let ty = ["time", "date", "timestamp", "datetime"]
        .contains(&lower.as_str())
        .then_some(ColumnType::Datetime);
    (role, ty)
}

fn has_role(spec: &AbstractSpec, role: ColumnRole, schema: Option<&DatasetSchema>) -> bool {
    spec.select_set()
        .iter()
        .filter(|f| !f.is_aggregated())
        .flat_map(|f| f.attributes())
        .any(|a| attribute_role(a, schema).0 == role)
}

fn is_temporal(field: &FieldExpr, schema: Option<&DatasetSchema>) -> bool {
    matches!(field, FieldExpr::Simple(name) if attribute_role(name, schema).1 == Some(ColumnType::Datetime))
}

fn is_map(spec: &AbstractSpec, schema: Option<&DatasetSchema>) -> bool {
    has_role(spec, ColumnRole::Latitude, schema) && has_role(spec, ColumnRole::Longitude, schema)
}

/// Chart type from the default rule table.
pub fn default_chart_type(spec: &AbstractSpec, schema: Option<&DatasetSchema>) -> &'static str {
    let select = spec.select_set();
    let aggregates = select.iter().filter(|f| f.is_aggregated()).count();
    let dimensions = select.len() - aggregates;
    if is_map(spec, schema) {
        "map-scatter"
    } else if spec.x.as_ref().is_some_and(|x| is_temporal(x, schema))
        && spec.layers.iter().any(FieldExpr::is_aggregated)
    {
        "line"
    } else if dimensions == 1 && aggregates >= 1 {
        "bar"
    } else if aggregates == 1 && spec.x.is_none() && spec.y.is_none() && dimensions == 0 {
        "box-plot"
    } else {
        "table"
    }
}

fn covers(pref: &VisualSpec, spec: &AbstractSpec, schema: Option<&DatasetSchema>) -> bool {
    if pref.chart_type == "map-scatter" && !is_map(spec, schema) {
        return false;
    }
    spec.layers.iter().all(|l| pref.cue_for(l).is_some())
}

/// Visual spec for a node: the user's preference when it encodes every
/// layer of the node, else the first one stored on the node, else the
/// default rule table.
pub fn choose_visual_spec(
    node: &SliceNode,
    user_pref: Option<&VisualSpec>,
    schema: Option<&DatasetSchema>,
) -> VisualSpec {
    if let Some(pref) = user_pref.filter(|p| covers(p, &node.spec, schema)) {
        return pref.restricted_to(|f| node.spec.layers.contains(f));
    }
    if let Some(stored) = node.visual_specs.iter().next() {
        return stored.clone();
    }
    let mut visual = VisualSpec::new(default_chart_type(&node.spec, schema));
    for (layer, cue) in node.spec.layers.iter().zip(DEFAULT_CUES) {
        visual = visual.encode(layer.clone(), cue);
    }
    visual
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Recommendation {
    pub node: RankedRecommendation,
    pub concrete_spec: DataSpecification,
    pub visual: VisualSpec,
    pub sql_template: String,
    /// Filter fields left unbounded by contextualization.
    pub placeholder_filters: Vec<FieldExpr>,
    /// The node is the user's current slice.
    pub is_current: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecommendResponse {
    pub task_type: String,
    pub mode: &'static str,
    pub threshold_ms: u64,
    pub matched: MatchResult,
    pub recommendations: Vec<Recommendation>,
}

#[derive(Debug, Clone, Copy)]
pub struct RecommendOptions<'a> {
    pub schema: Option<&'a DatasetSchema>,
    pub user_pref: Option<&'a VisualSpec>,
    pub m: usize,
    pub threshold_ms: u64,
}

impl Default for RecommendOptions<'_> {
    fn default() -> Self {
        RecommendOptions {
            schema: None,
            user_pref: None,
            m: DEFAULT_M,
            threshold_ms: crate::graph::DEFAULT_THRESHOLD_MS,
        }
    }
}

/// Match the current spec, rank interesting nodes around the matches and
/// turn each into a concrete, renderable recommendation.
pub fn recommend(
    graph: &DataSliceGraph,
    current: &DataSpecification,
    opts: RecommendOptions<'_>,
) -> Result<RecommendResponse, Error> {
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph.into());
    }
    let matched = match_data_slices(graph, current, opts.m.max(1))?;
    let ranked = rank_data_slices(graph, &matched.node_ids(), opts.m, opts.threshold_ms)?;
    let current_id = NodeId::for_spec(&canonicalize(current));
    let table = graph.meta.dataset.as_deref().unwrap_or(DEFAULT_TABLE);

    let mut recommendations = Vec::with_capacity(ranked.len());
    for node in ranked {
        let slice = graph.node(&node.node_id).expect("ranked nodes come from the graph");
        let concrete_spec = contextualize(&slice.spec, current);
        let sql_template = match opts.schema {
            Some(schema) => to_sql_template(&concrete_spec, schema)?,
            None => sql_template_unchecked(&concrete_spec, table),
        };
        let placeholder_filters = concrete_spec
            .filters
            .iter()
            .filter(|p| p.is_placeholder())
            .map(|p| p.field.clone())
            .collect();
        recommendations.push(Recommendation {
            visual: choose_visual_spec(slice, opts.user_pref, opts.schema),
            is_current: node.node_id == current_id,
            node,
            concrete_spec,
            sql_template,
            placeholder_filters,
        });
    }
    Ok(RecommendResponse {
        task_type: graph.task_type.clone(),
        mode: graph.mode(),
        threshold_ms: opts.threshold_ms,
        matched,
        recommendations,
    })
}
