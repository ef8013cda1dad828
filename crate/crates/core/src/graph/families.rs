//! Built-in host graphs used by fixtures and tests.
//!
//! Each generator returns a finite truncation of an infinite family; the
//! finite ball condition holds for every truncation since vertex degrees are
//! bounded and edge lengths are bounded below.

use super::{EdgeDocument, GraphDocument, MetricGraph, RawId};

fn build(vertices: Vec<String>, edges: Vec<(String, String, f64)>, root: &str) -> MetricGraph {
    let doc = GraphDocument {
        vertices: vertices.into_iter().map(RawId::Text).collect(),
        edges: edges
            .into_iter()
            .enumerate()
            .map(|(i, (a, b, len))| EdgeDocument {
                id: RawId::Text(format!("e{i}")),
                from: RawId::Text(a),
                to: RawId::Text(b),
                length: len,
            })
            .collect(),
        root: Some(RawId::Text(root.to_owned())),
    };
    MetricGraph::from_document(doc).expect("family generators produce valid graphs")
}

/// Path `v0 – v1 – … – v_n` with `n` edges, rooted at `v0`. A truncated half-line.
pub fn path(n: usize, length: f64) -> MetricGraph {
    assert!(n >= 1);
    let vertices = (0..=n).map(|i| format!("v{i}")).collect();
    let edges = (0..n)
        .map(|i| (format!("v{i}"), format!("v{}", i + 1), length))
        .collect();
    build(vertices, edges, "v0")
}

/// Star with center `c` and leaves `x1 … x_k`, edges oriented center → leaf.
pub fn star(arms: usize, length: f64) -> MetricGraph {
    assert!(arms >= 1);
    let mut vertices = vec!["c".to_owned()];
    vertices.extend((1..=arms).map(|i| format!("x{i}")));
    let edges = (1..=arms)
        .map(|i| ("c".to_owned(), format!("x{i}"), length))
        .collect();
    build(vertices, edges, "c")
}

/// Complete binary tree of the given depth, rooted at `t0`, children of `t_i`
/// at `t_{2i+1}` and `t_{2i+2}`.
pub fn binary_tree(depth: usize, length: f64) -> MetricGraph {
    let count = (1usize << (depth + 1)) - 1;
    let vertices = (0..count).map(|i| format!("t{i}")).collect();
    let edges = (1..count)
        .map(|i| (format!("t{}", (i - 1) / 2), format!("t{i}"), length))
        .collect();
    build(vertices, edges, "t0")
}

/// Ladder with `rungs` rungs: rails `a_i – a_{i+1}`, `b_i – b_{i+1}` and rungs
/// `a_i – b_i`, rooted at `a0`.
pub fn ladder(rungs: usize, length: f64) -> MetricGraph {
    assert!(rungs >= 2);
    let mut vertices = Vec::new();
    for i in 0..rungs {
        vertices.push(format!("a{i}"));
        vertices.push(format!("b{i}"));
    }
    let mut edges = Vec::new();
    for i in 0..rungs {
        edges.push((format!("a{i}"), format!("b{i}"), length));
        if i + 1 < rungs {
            edges.push((format!("a{i}"), format!("a{}", i + 1), length));
            edges.push((format!("b{i}"), format!("b{}", i + 1), length));
        }
    }
    build(vertices, edges, "a0")
}

/// Cycle `v0 → v1 → … → v_{n-1} → v0`.
pub fn cycle(n: usize, length: f64) -> MetricGraph {
    assert!(n >= 3);
    let vertices = (0..n).map(|i| format!("v{i}")).collect();
    let edges = (0..n)
        .map(|i| (format!("v{i}"), format!("v{}", (i + 1) % n), length))
        .collect();
    build(vertices, edges, "v0")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(path(40, 1.0).edge_count(), 40);
        assert_eq!(star(5, 1.0).vertex_count(), 6);
        assert_eq!(binary_tree(3, 1.0).edge_count(), 14);
        assert_eq!(ladder(4, 1.0).edge_count(), 10);
        assert_eq!(cycle(6, 0.5).edge_count(), 6);
    }

    #[test]
    fn finite_balls() {
        let g = binary_tree(4, 1.0);
        assert_eq!(g.ball_vertex_count(g.root(), 2.5), 7);
        let p = path(10, 0.5);
        assert_eq!(p.ball_vertex_count(0, 1.01), 3);
    }
}
