#![allow(dead_code)]

pub mod criteria;
pub mod gen;
pub mod reference;

use std::path::PathBuf;

use dataslicer_core::query::{load_dataset, Dataset, DatasetSchema};
use dataslicer_core::{canonicalize, parse_session_log, DataSpecification, NodeId, SessionSequence};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("reading fixture {name}: {e}"))
}

pub fn quake_schema() -> DatasetSchema {
    DatasetSchema::from_json(&fixture("earthquakes.schema.json")).unwrap()
}

pub fn quakes() -> Dataset {
    load_dataset(fixture("earthquakes.csv").as_bytes(), quake_schema()).unwrap()
}

/// Fig-1b style spec: map of places with three aggregate layers, bounded
/// to Central America.
pub fn fig1b() -> DataSpecification {
    serde_json::from_str(&fixture("fig1b.spec.json")).unwrap()
}

pub fn fig3_sequence() -> SessionSequence {
    let mut seqs = parse_session_log(&fixture("fig3.log.jsonl")).unwrap();
    assert_eq!(seqs.len(), 1);
    seqs.pop().unwrap()
}

/// Node ids of the six slices in the expert sequence, keyed by their
/// figure labels.
pub fn fig3_labels() -> Vec<(u32, NodeId)> {
    let seq = fig3_sequence();
    let order = [8, 9, 23, 24, 23, 8, 13, 14];
    let mut labels: Vec<(u32, NodeId)> = order
        .iter()
        .zip(&seq.events)
        .map(|(&label, e)| (label, NodeId::for_spec(&canonicalize(&e.spec))))
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

pub fn label_of(labels: &[(u32, NodeId)], id: &NodeId) -> u32 {
    labels
        .iter()
        .find(|(_, n)| n == id)
        .map(|(l, _)| *l)
        .unwrap_or_else(|| panic!("node {id} has no label"))
}

pub fn id_of(labels: &[(u32, NodeId)], label: u32) -> NodeId {
    labels.iter().find(|(l, _)| *l == label).unwrap().1.clone()
}

/// The map-scatter preference from the Fig-1b view.
pub fn fig_pref() -> dataslicer_core::VisualSpec {
    serde_json::from_str(&fixture("fig1b.visual.json")).unwrap()
}
