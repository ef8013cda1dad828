use std::collections::{BTreeSet, HashMap};

use super::FemError;
use crate::graph::{EdgePiece, Exhaustion, MetricGraph};

/// Whether the degree-one vertices `∂Γ` of the host graph carry a Dirichlet
/// condition (`Dirichlet`) or only the natural Kirchhoff/Neumann condition
/// (`Free`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    #[default]
    Dirichlet,
    Free,
}

/// Which form a mesh realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTag {
    WholeGraph,
    /// A compact subgraph `Γ_n` with Dirichlet conditions on its relative boundary.
    Subgraph,
    /// A truncated complement `Γ_N \ Γ_n`.
    Complement,
}

/// Vertices to be constrained to zero (or to prescribed data).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirichletTruncationSpec {
    /// Interface with the removed compact part `Γ_n`.
    pub inner: Vec<usize>,
    /// Where the host graph is cut at the outer radius (or the relative
    /// boundary of a compact subgraph inside the host).
    pub outer: Vec<usize>,
    /// Degree-one vertices of the host graph, when `∂Γ` is Dirichlet.
    pub boundary: Vec<usize>,
}

impl DirichletTruncationSpec {
    pub fn vertices(&self) -> BTreeSet<usize> {
        self.inner
            .iter()
            .chain(&self.outer)
            .chain(&self.boundary)
            .copied()
            .collect()
    }

    fn boundary_of(g: &MetricGraph, vertices: &BTreeSet<usize>, bc: BoundaryCondition) -> Vec<usize> {
        match bc {
            BoundaryCondition::Dirichlet => vertices.iter().copied().filter(|&v| g.is_boundary(v)).collect(),
            BoundaryCondition::Free => Vec::new(),
        }
    }
}

fn edge_vertices(g: &MetricGraph, edges: &[usize]) -> BTreeSet<usize> {
    edges
        .iter()
        .flat_map(|&e| [g.edge(e).from, g.edge(e).to])
        .collect()
}

/// The whole host graph.
pub fn whole_graph(g: &MetricGraph, bc: BoundaryCondition) -> (Vec<EdgePiece>, DirichletTruncationSpec) {
    let pieces = (0..g.edge_count()).map(|e| EdgePiece::whole(g, e)).collect();
    let all: BTreeSet<usize> = (0..g.vertex_count()).collect();
    let spec = DirichletTruncationSpec {
        boundary: DirichletTruncationSpec::boundary_of(g, &all, bc),
        ..Default::default()
    };
    (pieces, spec)
}

/// A compact subgraph made of whole edges, Dirichlet on its relative boundary
/// inside the host (vertices with an incident edge outside the subgraph).
pub fn subgraph(g: &MetricGraph, edges: &[usize], bc: BoundaryCondition) -> (Vec<EdgePiece>, DirichletTruncationSpec) {
    let inside: BTreeSet<usize> = edges.iter().copied().collect();
    let verts = edge_vertices(g, edges);
    let outer = verts
        .iter()
        .copied()
        .filter(|&v| g.incident(v).iter().any(|e| !inside.contains(e)))
        .collect();
    let pieces = edges.iter().map(|&e| EdgePiece::whole(g, e)).collect();
    let spec = DirichletTruncationSpec {
        inner: Vec::new(),
        outer,
        boundary: DirichletTruncationSpec::boundary_of(g, &verts, bc),
    };
    (pieces, spec)
}

/// The annulus `Γ_outer \ Γ_inner`, Dirichlet at the interface with `Γ_inner`
/// and where the host is cut beyond `Γ_outer`.
pub fn annulus(
    g: &MetricGraph,
    exhaustion: &Exhaustion,
    inner: usize,
    outer: usize,
    bc: BoundaryCondition,
) -> (Vec<EdgePiece>, DirichletTruncationSpec) {
    let inner_set: BTreeSet<usize> = exhaustion.level(inner).iter().copied().collect();
    let outer_set: BTreeSet<usize> = exhaustion.level(outer).iter().copied().collect();
    let edges: Vec<usize> = outer_set.difference(&inner_set).copied().collect();
    let verts = edge_vertices(g, &edges);
    let interface = verts
        .iter()
        .copied()
        .filter(|&v| exhaustion.vertex_in_level(inner, v))
        .collect();
    let cut = verts
        .iter()
        .copied()
        .filter(|&v| g.incident(v).iter().any(|e| !outer_set.contains(e)))
        .collect();
    let pieces = edges.iter().map(|&e| EdgePiece::whole(g, e)).collect();
    let spec = DirichletTruncationSpec {
        inner: interface,
        outer: cut,
        boundary: DirichletTruncationSpec::boundary_of(g, &verts, bc),
    };
    (pieces, spec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeLocation {
    Vertex(usize),
    Interior { edge: usize, offset: f64 },
    /// An interior edge point where the domain is cut; always constrained.
    Cut { edge: usize, offset: f64 },
}

impl NodeLocation {
    pub fn edge_offset(&self, g: &MetricGraph, edge: usize) -> Option<f64> {
        match *self {
            NodeLocation::Vertex(v) => {
                let e = g.edge(edge);
                if e.from == v {
                    Some(0.0)
                } else if e.to == v {
                    Some(e.length)
                } else {
                    None
                }
            }
            NodeLocation::Interior { edge: e, offset } | NodeLocation::Cut { edge: e, offset } => {
                (e == edge).then_some(offset)
            }
        }
    }
}

/// One linear element `[a, b]` on `edge`, joining `nodes[0]` (at `a`) and
/// `nodes[1]` (at `b`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub edge: usize,
    pub a: f64,
    pub b: f64,
    pub nodes: [usize; 2],
}

impl Cell {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        self.b <= self.a
    }
}

/// Edgewise uniform mesh with one shared node per graph vertex, which makes
/// every mesh function continuous at vertices.
#[derive(Debug, Clone)]
pub struct GraphMesh {
    pub(crate) h: f64,
    pub(crate) domain: DomainTag,
    pub(crate) pieces: Vec<EdgePiece>,
    pub(crate) nodes: Vec<NodeLocation>,
    pub(crate) cells: Vec<Cell>,
    pub(crate) vertex_node: HashMap<usize, usize>,
    pub(crate) dof: Vec<Option<usize>>,
    pub(crate) constrained: Vec<Option<usize>>,
    pub(crate) free_nodes: Vec<usize>,
    pub(crate) constrained_nodes: Vec<usize>,
    pub(crate) node_cells: Vec<Vec<usize>>,
}

/// Cells per piece: `⌈len / h⌉`, ignoring rounding noise in the ratio.
fn cell_count(len: f64, h: f64) -> usize {
    let ratio = len / h;
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    (n as usize).max(1)
}

impl GraphMesh {
    pub fn build(
        g: &MetricGraph,
        pieces: &[EdgePiece],
        h: f64,
        constraints: &DirichletTruncationSpec,
        domain: DomainTag,
    ) -> Result<Self, FemError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(FemError::InvalidCellSize(h));
        }
        let pieces: Vec<EdgePiece> = pieces.iter().copied().filter(|p| !p.is_empty()).collect();
        if pieces.is_empty() {
            return Err(FemError::EmptySelection);
        }
        let mut nodes = Vec::new();
        let mut vertex_node = HashMap::new();
        let mut cells = Vec::new();
        let mut vertex_or_new = |v: usize, nodes: &mut Vec<NodeLocation>| {
            *vertex_node.entry(v).or_insert_with(|| {
                nodes.push(NodeLocation::Vertex(v));
                nodes.len() - 1
            })
        };
        for piece in &pieces {
            let e = g.edge(piece.edge);
            if piece.start < 0.0 || piece.end > e.length {
                return Err(FemError::PieceOutOfRange {
                    edge: e.id.clone(),
                    start: piece.start,
                    end: piece.end,
                });
            }
            let start_node = if piece.start == 0.0 {
                vertex_or_new(e.from, &mut nodes)
            } else {
                nodes.push(NodeLocation::Cut {
                    edge: piece.edge,
                    offset: piece.start,
                });
                nodes.len() - 1
            };
            let n = cell_count(piece.len(), h);
            let step = piece.len() / n as f64;
            let mut prev = start_node;
            let mut prev_x = piece.start;
            for k in 1..=n {
                let (node, x) = if k == n {
                    let node = if piece.end == e.length {
                        vertex_or_new(e.to, &mut nodes)
                    } else {
                        nodes.push(NodeLocation::Cut {
                            edge: piece.edge,
                            offset: piece.end,
                        });
                        nodes.len() - 1
                    };
                    (node, piece.end)
                } else {
                    let x = piece.start + step * k as f64;
                    nodes.push(NodeLocation::Interior {
                        edge: piece.edge,
                        offset: x,
                    });
                    (nodes.len() - 1, x)
                };
                cells.push(Cell {
                    edge: piece.edge,
                    a: prev_x,
                    b: x,
                    nodes: [prev, node],
                });
                prev = node;
                prev_x = x;
            }
        }

        let fixed = constraints.vertices();
        let mut dof = vec![None; nodes.len()];
        let mut constrained = vec![None; nodes.len()];
        let mut free_nodes = Vec::new();
        let mut constrained_nodes = Vec::new();
        for (i, loc) in nodes.iter().enumerate() {
            let is_fixed = match loc {
                NodeLocation::Vertex(v) => fixed.contains(v),
                NodeLocation::Cut { .. } => true,
                NodeLocation::Interior { .. } => false,
            };
            if is_fixed {
                constrained[i] = Some(constrained_nodes.len());
                constrained_nodes.push(i);
            } else {
                dof[i] = Some(free_nodes.len());
                free_nodes.push(i);
            }
        }
        let mut node_cells = vec![Vec::new(); nodes.len()];
        for (c, cell) in cells.iter().enumerate() {
            node_cells[cell.nodes[0]].push(c);
            node_cells[cell.nodes[1]].push(c);
        }
        Ok(GraphMesh {
            h,
            domain,
            pieces,
            nodes,
            cells,
            vertex_node,
            dof,
            constrained,
            free_nodes,
            constrained_nodes,
            node_cells,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> DomainTag {
        self.domain
    }

    pub fn pieces(&self) -> &[EdgePiece] {
        &self.pieces
    }

    pub fn edges(&self) -> BTreeSet<usize> {
        self.pieces.iter().map(|p| p.edge).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn free_count(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn constrained_count(&self) -> usize {
        self.constrained_nodes.len()
    }

    pub fn nodes(&self) -> &[NodeLocation] {
        &self.nodes
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn node_cells(&self, node: usize) -> &[usize] {
        &self.node_cells[node]
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        self.vertex_node.get(&v).copied()
    }

    pub fn dof(&self, node: usize) -> Option<usize> {
        self.dof[node]
    }

    pub fn is_constrained(&self, node: usize) -> bool {
        self.constrained[node].is_some()
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    pub fn constrained_nodes(&self) -> &[usize] {
        &self.constrained_nodes
    }

    /// Vertices present in the mesh.
    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.vertex_node.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Full nodal vector from free values, with every constrained node set to
    /// `boundary_value`.
    pub fn expand(&self, free: &[f64], boundary_value: f64) -> Vec<f64> {
        assert_eq!(free.len(), self.free_count());
        (0..self.nodes.len())
            .map(|i| self.dof[i].map_or(boundary_value, |d| free[d]))
            .collect()
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free_nodes.iter().map(|&i| full[i]).collect()
    }

    /// Samples `f` at every node; vertex nodes are passed as `Vertex`.
    pub fn nodal(&self, f: impl Fn(NodeLocation) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&loc| f(loc)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;

    #[test]
    fn unit_edge_half_cells_dirichlet() {
        let g = families::path(1, 1.0);
        let (pieces, spec) = whole_graph(&g, BoundaryCondition::Dirichlet);
        let m = GraphMesh::build(&g, &pieces, 0.5, &spec, DomainTag::WholeGraph).unwrap();
        assert_eq!(m.free_count(), 1);
        assert_eq!(m.constrained_count(), 2);
    }

    #[test]
    fn star_free_dofs() {
        let g = families::star(3, 1.0);
        let (pieces, spec) = whole_graph(&g, BoundaryCondition::Dirichlet);
        let m = GraphMesh::build(&g, &pieces, 0.5, &spec, DomainTag::WholeGraph).unwrap();
        assert_eq!(m.free_count(), 4);
        let c = m.vertex_node(0).unwrap();
        assert!(m.dof(c).is_some());
        assert_eq!(m.node_cells(c).len(), 3);
    }

    #[test]
    fn two_edge_path_third_cells_unconstrained() {
        let g = families::path(2, 1.0);
        let (pieces, spec) = whole_graph(&g, BoundaryCondition::Free);
        let m = GraphMesh::build(&g, &pieces, 1.0 / 3.0, &spec, DomainTag::WholeGraph).unwrap();
        // hand count: 3 cells per edge, 6 cells, 7 nodes, all free
        assert_eq!(m.cells().len(), 6);
        assert_eq!(m.free_count(), 7);
        assert!(m.cells().iter().all(|c| c.len() <= 1.0 / 3.0 + 1e-15));
    }

    #[test]
    fn cell_sizes_bounded_by_h() {
        let g = families::path(3, 0.7);
        let (pieces, spec) = whole_graph(&g, BoundaryCondition::Free);
        let m = GraphMesh::build(&g, &pieces, 0.3, &spec, DomainTag::WholeGraph).unwrap();
        assert!(m.cells().iter().all(|c| c.len() <= 0.3));
        assert_eq!(m.cells().len(), 9);
    }

    #[test]
    fn errors() {
        let g = families::path(1, 1.0);
        let (pieces, spec) = whole_graph(&g, BoundaryCondition::Free);
        assert!(matches!(
            GraphMesh::build(&g, &pieces, 0.0, &spec, DomainTag::WholeGraph),
            Err(FemError::InvalidCellSize(_))
        ));
        assert!(matches!(
            GraphMesh::build(&g, &[], 0.1, &spec, DomainTag::WholeGraph),
            Err(FemError::EmptySelection)
        ));
    }

    #[test]
    fn cut_points_are_constrained() {
        let g = families::path(2, 1.0);
        let pieces = [
            EdgePiece::whole(&g, 0),
            EdgePiece { edge: 1, start: 0.0, end: 0.5 },
        ];
        let m = GraphMesh::build(&g, &pieces, 0.25, &DirichletTruncationSpec::default(), DomainTag::Subgraph)
            .unwrap();
        assert_eq!(m.constrained_count(), 1);
        let cut = m.constrained_nodes()[0];
        assert_eq!(m.nodes()[cut], NodeLocation::Cut { edge: 1, offset: 0.5 });
    }

    #[test]
    fn annulus_constraints() {
        let g = families::path(10, 1.0);
        let ex = Exhaustion::build(&g, 0, 10).unwrap();
        let (pieces, spec) = annulus(&g, &ex, 2, 6, BoundaryCondition::Dirichlet);
        assert_eq!(pieces.len(), 4);
        assert_eq!(spec.inner, vec![2]);
        assert_eq!(spec.outer, vec![6]);
        assert!(spec.boundary.is_empty());
        let (_, spec) = annulus(&g, &ex, 2, 10, BoundaryCondition::Dirichlet);
        assert!(spec.outer.is_empty());
        assert_eq!(spec.boundary, vec![10]);
    }
}
