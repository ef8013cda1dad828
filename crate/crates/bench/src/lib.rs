//! Shared fixtures for the solver benchmarks.

use std::sync::Arc;

use qgraph::fem::{whole_graph, DomainTag};
use qgraph::graph::families;
use qgraph::{assemble, AssembledForms, CoefficientField, Exhaustion, GraphMesh, MetricGraph, Pencil};

/// Path of `edges` unit edges with its exhaustion and `p = w = 1, q = 0`.
pub fn half_line(edges: usize) -> (MetricGraph, CoefficientField, Exhaustion) {
    let g = families::path(edges, 1.0);
    let f = CoefficientField::free(&g);
    let ex = Exhaustion::build(&g, 0, edges).expect("path exhaustion");
    (g, f, ex)
}

/// Binary tree with an oscillating potential and a piecewise weight.
pub fn rough_tree(depth: usize) -> (MetricGraph, CoefficientField) {
    let g = families::binary_tree(depth, 1.0);
    let doc = r#"{"default": {"p": {"expr": "1 + 0.5*sin(3*x)"}, "q": {"expr": "x*x - 0.5"},
                  "w": {"piecewise": [[0, 1], [0.5, 2]]}}}"#;
    let f = CoefficientField::from_json(doc, &g).expect("coefficient document");
    (g, f)
}

pub fn whole_forms(g: &MetricGraph, f: &CoefficientField, h: f64) -> AssembledForms {
    let (pieces, spec) = whole_graph(g, qgraph::BoundaryCondition::Dirichlet);
    let mesh = GraphMesh::build(g, &pieces, h, &spec, DomainTag::WholeGraph).expect("mesh");
    assemble(Arc::new(mesh), f).expect("assembly")
}

pub fn whole_pencil(g: &MetricGraph, f: &CoefficientField, h: f64) -> Pencil {
    Pencil::from_forms(&whole_forms(g, f, h))
}
