//! Metric graphs: vertices, oriented edges carrying lengths, the path metric and
//! exhaustions by nested compact subgraphs.
//!
//! Every edge `e` is identified with the interval `[0, |e|]`, offset `0` sitting
//! at the initial vertex `o(e)`. Loops and parallel edges are accepted on input
//! and normalized at load time by inserting an artificial midpoint vertex, so
//! everything downstream sees a simple graph. Kirchhoff conditions at a degree-2
//! vertex reduce to smoothness, so the split leaves the operator unchanged.

mod document;
mod exhaustion;
pub mod families;

pub use document::{EdgeDocument, GraphDocument, RawId};
pub use exhaustion::{EdgePiece, Exhaustion};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet, VecDeque};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph document parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("edge `{edge}` has nonpositive length {length}")]
    NonPositiveLength { edge: String, length: f64 },
    #[error("graph is disconnected; components: {}", format_components(.components))]
    Disconnected { components: Vec<Vec<String>> },
    #[error("graph has no vertices")]
    Empty,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("point is not on the graph: {0}")]
    PointOffGraph(String),
}

fn format_components(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Where a normalized edge came from, when it is one half of a split loop or
/// parallel edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOrigin {
    pub parent: String,
    /// Offset of this half's `0` inside the parent edge.
    pub offset: f64,
    pub parent_length: f64,
    pub half: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: f64,
    pub origin: Option<SplitOrigin>,
}

impl Edge {
    /// Edge id used for coefficient lookup (the parent id for split halves).
    pub fn coefficient_id(&self) -> &str {
        self.origin.as_ref().map_or(&self.id, |o| &o.parent)
    }

    /// Offset to add to a local coordinate to obtain the parent-edge coordinate.
    pub fn coefficient_offset(&self) -> f64 {
        self.origin.as_ref().map_or(0.0, |o| o.offset)
    }

    pub fn other_end(&self, v: usize) -> usize {
        if self.from == v {
            self.to
        } else {
            self.from
        }
    }
}

/// A location on the graph: a vertex, or an arclength offset on an edge
/// measured from the edge's initial vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Vertex(usize),
    OnEdge { edge: usize, offset: f64 },
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertex_ids: Vec<String>,
    vertex_lookup: HashMap<String, usize>,
    artificial: Vec<bool>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<String, usize>,
    incident: Vec<Vec<usize>>,
    root: usize,
}

impl MetricGraph {
    /// Parses and validates a JSON graph document.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: GraphDocument) -> Result<Self, GraphError> {
        if doc.vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vertex_ids = Vec::with_capacity(doc.vertices.len());
        let mut vertex_lookup = HashMap::new();
        for (i, raw) in doc.vertices.into_iter().enumerate() {
            let id = raw.into_string();
            if vertex_lookup.insert(id.clone(), i).is_some() {
                return Err(GraphError::Field {
                    field: format!("vertices[{i}]"),
                    message: format!("duplicate vertex id `{id}`"),
                });
            }
            vertex_ids.push(id);
        }
        let mut artificial = vec![false; vertex_ids.len()];

        let mut seen_edge_ids = HashSet::new();
        let mut seen_pairs = HashSet::new();
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (k, ed) in doc.edges.into_iter().enumerate() {
            let id = ed.id.into_string();
            if !seen_edge_ids.insert(id.clone()) {
                return Err(GraphError::Field {
                    field: format!("edges[{k}].id"),
                    message: format!("duplicate edge id `{id}`"),
                });
            }
            let resolve = |raw: RawId, name: &str| {
                let s = raw.into_string();
                vertex_lookup
                    .get(&s)
                    .copied()
                    .ok_or_else(|| GraphError::Field {
                        field: format!("edges[{k}].{name}"),
                        message: format!("unknown vertex `{s}`"),
                    })
            };
            let from = resolve(ed.from, "from")?;
            let to = resolve(ed.to, "to")?;
            if !(ed.length > 0.0) || !ed.length.is_finite() {
                return Err(GraphError::NonPositiveLength {
                    edge: id,
                    length: ed.length,
                });
            }
            let pair = (from.min(to), from.max(to));
            if from != to && seen_pairs.insert(pair) {
                edges.push(Edge {
                    id,
                    from,
                    to,
                    length: ed.length,
                    origin: None,
                });
                continue;
            }
            // loop or parallel edge: split at the midpoint
            let mut mid_id = format!("{id}~mid");
            while vertex_lookup.contains_key(&mid_id) {
                mid_id.push('~');
            }
            let mid = vertex_ids.len();
            vertex_lookup.insert(mid_id.clone(), mid);
            vertex_ids.push(mid_id);
            artificial.push(true);
            let half = ed.length / 2.0;
            for (h, (a, b, offset)) in [(from, mid, 0.0), (mid, to, half)].into_iter().enumerate() {
                edges.push(Edge {
                    id: format!("{id}#{h}"),
                    from: a,
                    to: b,
                    length: half,
                    origin: Some(SplitOrigin {
                        parent: id.clone(),
                        offset,
                        parent_length: ed.length,
                        half: h as u8,
                    }),
                });
            }
        }

        let mut incident = vec![Vec::new(); vertex_ids.len()];
        for (i, e) in edges.iter().enumerate() {
            incident[e.from].push(i);
            incident[e.to].push(i);
        }
        let edge_lookup = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();

        let root = match doc.root {
            Some(raw) => {
                let s = raw.into_string();
                *vertex_lookup.get(&s).ok_or_else(|| GraphError::Field {
                    field: "root".into(),
                    message: format!("unknown vertex `{s}`"),
                })?
            }
            None => 0,
        };

        let g = MetricGraph {
            vertex_ids,
            vertex_lookup,
            artificial,
            edges,
            edge_lookup,
            incident,
            root,
        };
        let components = g.components();
        if components.len() > 1 {
            return Err(GraphError::Disconnected {
                components: components
                    .into_iter()
                    .map(|c| c.into_iter().map(|v| g.vertex_ids[v].clone()).collect())
                    .collect(),
            });
        }
        Ok(g)
    }

    /// Serializes back to a document, merging split halves into their parent
    /// edges and dropping artificial midpoint vertices.
    pub fn to_document(&self) -> GraphDocument {
        let vertices = self
            .vertex_ids
            .iter()
            .zip(&self.artificial)
            .filter(|(_, &a)| !a)
            .map(|(id, _)| RawId::Text(id.clone()))
            .collect();
        let mut edges = Vec::new();
        for e in &self.edges {
            match &e.origin {
                None => edges.push(EdgeDocument {
                    id: RawId::Text(e.id.clone()),
                    from: RawId::Text(self.vertex_ids[e.from].clone()),
                    to: RawId::Text(self.vertex_ids[e.to].clone()),
                    length: e.length,
                }),
                Some(o) if o.half == 0 => {
                    let second = &self.edges[self.edge_lookup[&format!("{}#1", o.parent)]];
                    edges.push(EdgeDocument {
                        id: RawId::Text(o.parent.clone()),
                        from: RawId::Text(self.vertex_ids[e.from].clone()),
                        to: RawId::Text(self.vertex_ids[second.to].clone()),
                        length: o.parent_length,
                    });
                }
                Some(_) => {}
            }
        }
        GraphDocument {
            vertices,
            edges,
            root: Some(RawId::Text(self.vertex_ids[self.root].clone())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph document serializes")
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_ids.len();
        let mut label = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            label[s] = c;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &e in &self.incident[v] {
                    let u = self.edges[e].other_end(v);
                    if label[u] == usize::MAX {
                        label[u] = c;
                        members.push(u);
                        queue.push_back(u);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_lookup.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_lookup.get(id).copied()
    }

    pub fn is_artificial(&self, v: usize) -> bool {
        self.artificial[v]
    }

    /// Incident edge set `E_v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn with_root(mut self, root: usize) -> Self {
        assert!(root < self.vertex_count());
        self.root = root;
        self
    }

    /// Boundary vertices `∂Γ`: those of degree one.
    pub fn boundary(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&v| self.degree(v) == 1)
            .collect()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.degree(v) == 1
    }

    /// `sup |e|`.
    pub fn max_edge_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    /// `inf |e|`.
    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    /// Number of vertices at distance `< r` from `v`. Always finite for a
    /// loaded host graph; the family generators use it to check the finite
    /// ball condition up to the radius they were built for.
    pub fn ball_vertex_count(&self, v: usize, r: f64) -> usize {
        self.vertex_distances(v).iter().filter(|&&d| d < r).count()
    }

    /// Shortest-path distances from `source` to every vertex.
    pub fn vertex_distances(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct State(f64, usize);
        impl Eq for State {}
        impl PartialOrd for State {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for State {
            fn cmp(&self, other: &Self) -> Ordering {
                other
                    .0
                    .total_cmp(&self.0)
                    .then_with(|| other.1.cmp(&self.1))
            }
        }

        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        dist[source] = 0.0;
        let mut heap = BinaryHeap::from([State(0.0, source)]);
        while let Some(State(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &e in &self.incident[v] {
                let edge = &self.edges[e];
                let u = edge.other_end(v);
                let nd = d + edge.length;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(State(nd, u));
                }
            }
        }
        dist
    }

    fn check_point(&self, p: Point) -> Result<(), GraphError> {
        match p {
            Point::Vertex(v) if v < self.vertex_count() => Ok(()),
            Point::Vertex(v) => Err(GraphError::PointOffGraph(format!("vertex index {v}"))),
            Point::OnEdge { edge, offset } => {
                let Some(e) = self.edges.get(edge) else {
                    return Err(GraphError::PointOffGraph(format!("edge index {edge}")));
                };
                if (0.0..=e.length).contains(&offset) {
                    Ok(())
                } else {
                    Err(GraphError::PointOffGraph(format!(
                        "offset {offset} outside [0, {}] on edge `{}`",
                        e.length, e.id
                    )))
                }
            }
        }
    }

    /// The vertices a point can leave through, with the distance to each.
    fn exits(&self, p: Point) -> Vec<(usize, f64)> {
        match p {
            Point::Vertex(v) => vec![(v, 0.0)],
            Point::OnEdge { edge, offset } => {
                let e = &self.edges[edge];
                vec![(e.from, offset), (e.to, e.length - offset)]
            }
        }
    }

    /// Path distance `ρ(x, y)`.
    pub fn distance(&self, x: Point, y: Point) -> Result<f64, GraphError> {
        self.check_point(x)?;
        self.check_point(y)?;
        let mut best = f64::INFINITY;
        if let (
            Point::OnEdge { edge: e1, offset: a },
            Point::OnEdge { edge: e2, offset: b },
        ) = (x, y)
        {
            if e1 == e2 {
                best = (a - b).abs();
            }
        }
        let y_exits = self.exits(y);
        for (v, dx) in self.exits(x) {
            let dist = self.vertex_distances(v);
            for &(u, dy) in &y_exits {
                best = best.min(dx + dist[u] + dy);
            }
        }
        Ok(best)
    }

    /// Vertex ids grouped by split parent, for diagnostics.
    pub fn split_parents(&self) -> BTreeMap<String, Vec<usize>> {
        let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            if let Some(o) = &e.origin {
                out.entry(o.parent.clone()).or_default().push(i);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(vertices: &[&str], edges: &[(&str, &str, &str, f64)]) -> GraphDocument {
        GraphDocument {
            vertices: vertices.iter().map(|&v| v.into()).collect(),
            edges: edges
                .iter()
                .map(|&(id, a, b, l)| EdgeDocument {
                    id: id.into(),
                    from: a.into(),
                    to: b.into(),
                    length: l,
                })
                .collect(),
            root: None,
        }
    }

    #[test]
    fn single_edge() {
        let g = MetricGraph::from_document(doc(&["a", "b"], &[("e", "a", "b", 1.0)])).unwrap();
        assert_eq!(g.boundary(), vec![0, 1]);
        assert_eq!(g.max_edge_length(), 1.0);
        assert_eq!(g.min_edge_length(), 1.0);
    }

    #[test]
    fn three_star_degrees() {
        let g = families::star(3, 1.0);
        let c = g.vertex_index("c").unwrap();
        assert_eq!(g.degree(c), 3);
        let leaves: Vec<&str> = g.boundary().iter().map(|&v| g.vertex_id(v)).collect();
        assert_eq!(leaves, vec!["x1", "x2", "x3"]);
    }

    #[test]
    fn loop_is_split_at_midpoint() {
        let g = MetricGraph::from_document(doc(&["a"], &[("l", "a", "a", 2.0)])).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.vertex_count(), 2);
        assert!(g.edges().iter().all(|e| e.length == 1.0));
        assert!(g.is_artificial(1));
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.edge(1).coefficient_offset(), 1.0);
        assert_eq!(g.edge(1).coefficient_id(), "l");
    }

    #[test]
    fn parallel_edges_split_second_copy() {
        let g = MetricGraph::from_document(doc(
            &["a", "b"],
            &[("p", "a", "b", 1.0), ("q", "b", "a", 3.0)],
        ))
        .unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edge(0).id, "p");
        assert_eq!(g.edge(1).id, "q#0");
        assert_eq!(g.edge(2).id, "q#1");
        assert_eq!(g.edge(2).to, 0);
    }

    #[test]
    fn split_round_trip_reproduces_edges() {
        let g = MetricGraph::from_document(doc(
            &["a", "b"],
            &[("p", "a", "b", 1.0), ("q", "b", "a", 3.0), ("l", "b", "b", 0.5)],
        ))
        .unwrap();
        let again = MetricGraph::from_document(g.to_document()).unwrap();
        assert_eq!(g.edges(), again.edges());
        assert_eq!(g.vertex_count(), again.vertex_count());
    }

    #[test]
    fn rejects_nonpositive_length() {
        let err = MetricGraph::from_document(doc(&["a", "b"], &[("e", "a", "b", 0.0)])).unwrap_err();
        assert!(matches!(err, GraphError::NonPositiveLength { .. }));
    }

    #[test]
    fn rejects_disconnected() {
        let err = MetricGraph::from_document(doc(
            &["a", "b", "c", "d"],
            &[("e", "a", "b", 1.0), ("f", "c", "d", 1.0)],
        ))
        .unwrap_err();
        match err {
            GraphError::Disconnected { components } => {
                assert_eq!(components, vec![vec!["a", "b"], vec!["c", "d"]]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_reports_position() {
        let err = MetricGraph::from_json("{\"vertices\": [\"a\"],\n \"edges\": [}").unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = MetricGraph::from_json(r#"{"vertices":["a"],"edges":[],"colour":1}"#).unwrap_err();
        assert!(matches!(err, GraphError::Parse { .. }));
    }

    #[test]
    fn unknown_vertex_names_field() {
        let err =
            MetricGraph::from_json(r#"{"vertices":["a"],"edges":[{"id":0,"from":"a","to":"z","length":1}]}"#)
                .unwrap_err();
        assert_eq!(
            err,
            GraphError::Field {
                field: "edges[0].to".into(),
                message: "unknown vertex `z`".into()
            }
        );
    }

    #[test]
    fn distances_on_small_graphs() {
        let g = MetricGraph::from_document(doc(
            &["a", "b", "c"],
            &[("ab", "a", "b", 1.0), ("bc", "b", "c", 2.0)],
        ))
        .unwrap();
        let p = Point::OnEdge { edge: 1, offset: 0.5 };
        assert_eq!(g.distance(p, p).unwrap(), 0.0);
        assert_eq!(g.distance(Point::Vertex(0), Point::Vertex(2)).unwrap(), 3.0);
        assert_eq!(g.distance(Point::Vertex(0), p).unwrap(), 1.5);

        let cyc = families::cycle(4, 1.0);
        // both ways around have length 2
        assert_eq!(cyc.distance(Point::Vertex(0), Point::Vertex(2)).unwrap(), 2.0);
        let mid = Point::OnEdge { edge: 0, offset: 0.25 };
        let other = Point::OnEdge { edge: 2, offset: 0.5 };
        // hand enumeration: 0.25 + 1 + 0.5 one way, 0.75 + 1 + 0.5 the other
        assert_eq!(cyc.distance(mid, other).unwrap(), 1.75);
    }

    #[test]
    fn off_graph_points_rejected() {
        let g = families::path(2, 1.0);
        assert!(g
            .distance(Point::OnEdge { edge: 0, offset: 1.5 }, Point::Vertex(0))
            .is_err());
        assert!(g.distance(Point::Vertex(9), Point::Vertex(0)).is_err());
    }
}
