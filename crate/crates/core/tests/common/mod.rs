#![allow(dead_code)]

use std::path::PathBuf;

use qgraph::{CoefficientField, MetricGraph};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn graph(name: &str) -> MetricGraph {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    MetricGraph::from_json(&text).expect("fixture graph parses")
}

pub fn coeffs(name: &str, g: &MetricGraph) -> CoefficientField {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture readable");
    CoefficientField::from_json(&text, g).expect("fixture coefficients parse")
}

/// The five finite test graphs of the property suites.
pub const AP_GRAPHS: [&str; 5] = ["interval.json", "star3.json", "tree.json", "ladder.json", "kite.json"];
