use super::{GraphError, MetricGraph};

/// Slack used when comparing accumulated path lengths against integer radii.
const RADIUS_SLACK: f64 = 1e-9;

/// A sub-interval `[start, end]` of one edge, in that edge's coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePiece {
    pub edge: usize,
    pub start: f64,
    pub end: f64,
}

impl EdgePiece {
    pub fn whole(g: &MetricGraph, edge: usize) -> Self {
        EdgePiece {
            edge,
            start: 0.0,
            end: g.edge(edge).length,
        }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Nested subgraphs `Γ_0 ⊆ Γ_1 ⊆ …` around a fixed root, where `Γ_n` is the
/// union of edges whose two endpoints both lie within distance `n` of the
/// root, and the halo `Γ̃_n` adds the edges with exactly one endpoint there.
#[derive(Debug, Clone)]
pub struct Exhaustion {
    root: usize,
    max_level: usize,
    vertex_distance: Vec<f64>,
    /// Smallest `n` with the vertex inside `Γ_n`.
    vertex_level: Vec<usize>,
    levels: Vec<Vec<usize>>,
    haloes: Vec<Vec<usize>>,
}

fn level_of(d: f64) -> usize {
    if d <= RADIUS_SLACK {
        0
    } else {
        (d - RADIUS_SLACK).ceil() as usize
    }
}

impl Exhaustion {
    pub fn build(g: &MetricGraph, root: usize, max_level: usize) -> Result<Self, GraphError> {
        if root >= g.vertex_count() {
            return Err(GraphError::UnknownVertex(format!("index {root}")));
        }
        let vertex_distance = g.vertex_distances(root);
        let vertex_level: Vec<usize> = vertex_distance.iter().map(|&d| level_of(d)).collect();
        let mut levels = Vec::with_capacity(max_level + 1);
        let mut haloes = Vec::with_capacity(max_level + 1);
        for n in 0..=max_level {
            let mut inner = Vec::new();
            let mut halo = Vec::new();
            for (i, e) in g.edges().iter().enumerate() {
                let a = vertex_level[e.from] <= n;
                let b = vertex_level[e.to] <= n;
                match (a, b) {
                    (true, true) => inner.push(i),
                    (true, false) | (false, true) => halo.push(i),
                    _ => {}
                }
            }
            levels.push(inner);
            haloes.push(halo);
        }
        Ok(Exhaustion {
            root,
            max_level,
            vertex_distance,
            vertex_level,
            levels,
            haloes,
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    /// Edges of `Γ_n`, in ascending edge index.
    pub fn level(&self, n: usize) -> &[usize] {
        &self.levels[n]
    }

    /// Edges of `Γ̃_n \ Γ_n`.
    pub fn halo(&self, n: usize) -> &[usize] {
        &self.haloes[n]
    }

    /// Edges of `Γ̃_n`.
    pub fn extended(&self, n: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.levels[n].iter().chain(&self.haloes[n]).copied().collect();
        out.sort_unstable();
        out
    }

    pub fn vertex_in_level(&self, n: usize, v: usize) -> bool {
        self.vertex_level[v] <= n
    }

    pub fn edge_in_level(&self, g: &MetricGraph, n: usize, e: usize) -> bool {
        let edge = g.edge(e);
        self.vertex_in_level(n, edge.from) && self.vertex_in_level(n, edge.to)
    }

    pub fn distance_to(&self, v: usize) -> f64 {
        self.vertex_distance[v]
    }

    /// True when `Γ_n` already contains every edge of the host graph.
    pub fn covers_host(&self, g: &MetricGraph, n: usize) -> bool {
        self.levels[n].len() == g.edge_count()
    }

    /// The closed metric ball `Γ(o; r)` as edge pieces. Edges crossed by the
    /// sphere of radius `r` contribute one or two partial pieces whose interior
    /// endpoints are cut points.
    pub fn metric_ball(&self, g: &MetricGraph, r: f64) -> Vec<EdgePiece> {
        let mut out = Vec::new();
        for (i, e) in g.edges().iter().enumerate() {
            let reach_from = r - self.vertex_distance[e.from];
            let reach_to = r - self.vertex_distance[e.to];
            if reach_from + reach_to >= e.length {
                if reach_from >= 0.0 || reach_to >= 0.0 {
                    out.push(EdgePiece::whole(g, i));
                }
                continue;
            }
            if reach_from > 0.0 {
                out.push(EdgePiece {
                    edge: i,
                    start: 0.0,
                    end: reach_from,
                });
            }
            if reach_to > 0.0 {
                out.push(EdgePiece {
                    edge: i,
                    start: e.length - reach_to,
                    end: e.length,
                });
            }
        }
        out
    }
}
