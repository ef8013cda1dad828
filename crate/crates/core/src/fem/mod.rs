//! Continuous piecewise-linear elements on metric graphs.
//!
//! Vertex nodes are shared by all incident edges, so mesh functions are
//! continuous and the Kirchhoff condition is the natural condition of the
//! assembled form. Constrained nodes are eliminated: the pencils act on free
//! nodes only, with the free-by-constrained coupling kept for lifting
//! nonzero boundary data.

mod mesh;

pub use mesh::{
    annulus, subgraph, whole_graph, BoundaryCondition, Cell, DirichletTruncationSpec, DomainTag, GraphMesh,
    NodeLocation,
};

use std::fs::File;
use std::io::{self, BufWriter};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::coeff::{CoeffError, CoefficientField};
use crate::graph::MetricGraph;
use crate::sparse::{write_matrix_market, CsrMatrix, TripletBuilder};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("cell size must be positive and finite, got {0}")]
    InvalidCellSize(f64),
    #[error("the selected domain has no edges")]
    EmptySelection,
    #[error("piece [{start}, {end}] lies outside edge `{edge}`")]
    PieceOutOfRange { edge: String, start: f64, end: f64 },
    #[error("vertex `{0}` is not part of the mesh")]
    VertexNotInMesh(String),
    #[error("vertex `{0}` carries a Dirichlet condition; no Kirchhoff residual is defined there")]
    ConstrainedVertex(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// Stiffness `K_p = ∫ p φ'ᵢ φ'ⱼ`, potential `K_q = ∫ q φᵢ φⱼ` and mass
/// `M = ∫ w φᵢ φⱼ` on one mesh.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    mesh: Arc<GraphMesh>,
    full: [CsrMatrix; 3],
    pub k_p: CsrMatrix,
    pub k_q: CsrMatrix,
    pub m: CsrMatrix,
    /// Free rows, constrained columns.
    pub k_p_b: CsrMatrix,
    pub k_q_b: CsrMatrix,
    pub m_b: CsrMatrix,
}

/// Minimum grid per edge used to verify positivity of `p` and `w` before
/// assembly, on top of every quadrature node.
const POSITIVITY_GRID: usize = 64;

pub fn assemble(mesh: Arc<GraphMesh>, field: &CoefficientField) -> Result<AssembledForms, FemError> {
    for e in mesh.edges() {
        field.check_positive(e, POSITIVITY_GRID)?;
    }
    let n = mesh.node_count();
    let mut kp = TripletBuilder::new(n, n);
    let mut kq = TripletBuilder::new(n, n);
    let mut mm = TripletBuilder::new(n, n);
    for cell in mesh.cells() {
        let (a, b) = (cell.a, cell.b);
        let len = b - a;
        let mut ip = 0.0;
        let mut q = [0.0; 3];
        let mut w = [0.0; 3];
        let mut bad: Option<(f64, &'static str, f64)> = None;
        field.visit_nodes(cell.edge, a, b, |x, wt, s| {
            if bad.is_none() {
                if !(s.p > 0.0) || !s.p.is_finite() {
                    bad = Some((x, "p", s.p));
                } else if !(s.w > 0.0) || !s.w.is_finite() {
                    bad = Some((x, "w", s.w));
                }
            }
            let phi1 = (x - a) / len;
            let phi0 = 1.0 - phi1;
            ip += wt * s.p;
            q[0] += wt * s.q * phi0 * phi0;
            q[1] += wt * s.q * phi0 * phi1;
            q[2] += wt * s.q * phi1 * phi1;
            w[0] += wt * s.w * phi0 * phi0;
            w[1] += wt * s.w * phi0 * phi1;
            w[2] += wt * s.w * phi1 * phi1;
        })?;
        if let Some((x, coefficient, value)) = bad {
            return Err(CoeffError::NotPositive {
                edge: field.edge_id(cell.edge).to_string(),
                coefficient,
                x,
                value,
            }
            .into());
        }
        if !(ip.is_finite() && q.iter().chain(&w).all(|v| v.is_finite())) {
            return Err(CoeffError::Integrability {
                edge: field.edge_id(cell.edge).to_string(),
                x: 0.5 * (a + b),
            }
            .into());
        }
        let s = ip / (len * len);
        let [i, j] = cell.nodes;
        for (builder, local) in [
            (&mut kp, [s, -s, s]),
            (&mut kq, q),
            (&mut mm, w),
        ] {
            builder.push(i, i, local[0]);
            builder.push(i, j, local[1]);
            builder.push(j, i, local[1]);
            builder.push(j, j, local[2]);
        }
    }
    let full = [kp.build(), kq.build(), mm.build()];
    let free = mesh.free_nodes();
    let fixed = mesh.constrained_nodes();
    Ok(AssembledForms {
        k_p: full[0].submatrix(free, free),
        k_q: full[1].submatrix(free, free),
        m: full[2].submatrix(free, free),
        k_p_b: full[0].submatrix(free, fixed),
        k_q_b: full[1].submatrix(free, fixed),
        m_b: full[2].submatrix(free, fixed),
        full,
        mesh,
    })
}

impl AssembledForms {
    pub fn mesh(&self) -> &GraphMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<GraphMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn free_count(&self) -> usize {
        self.mesh.free_count()
    }

    /// `K_p + K_q` on free nodes.
    pub fn stiffness(&self) -> CsrMatrix {
        self.k_p.linear_combination(1.0, &self.k_q, 1.0)
    }

    /// `K - λ M` on free nodes.
    pub fn shifted(&self, lambda: f64) -> CsrMatrix {
        self.stiffness().linear_combination(1.0, &self.m, -lambda)
    }

    /// Free-by-constrained block of `K - λ M`.
    pub fn shifted_coupling(&self, lambda: f64) -> CsrMatrix {
        self.k_p_b
            .linear_combination(1.0, &self.k_q_b, 1.0)
            .linear_combination(1.0, &self.m_b, -lambda)
    }

    /// `(∫ p f'², ∫ q f², ∫ w f²)` for a full nodal vector.
    pub fn energies(&self, nodal: &[f64]) -> (f64, f64, f64) {
        let quad = |a: &CsrMatrix| crate::sparse::dot(nodal, &a.mul_vec(nodal));
        (quad(&self.full[0]), quad(&self.full[1]), quad(&self.full[2]))
    }

    /// Full node-by-node matrices, constrained nodes included.
    pub fn full_matrices(&self) -> &[CsrMatrix; 3] {
        &self.full
    }

    /// Writes `k_p.mtx`, `k_q.mtx` and `m.mtx` (free nodes) into `dir`.
    pub fn dump(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [("k_p", &self.k_p), ("k_q", &self.k_q), ("m", &self.m)] {
            let mut out = BufWriter::new(File::create(dir.join(format!("{name}.mtx")))?);
            write_matrix_market(&mut out, m, Some(name))?;
        }
        Ok(())
    }
}

/// Discrete flux balance `|Σ p ∂ₑf(v)|` at a free vertex, with outgoing
/// derivatives taken as difference quotients on the adjacent cells and `p`
/// averaged over each cell.
pub fn kirchhoff_residual(
    g: &MetricGraph,
    mesh: &GraphMesh,
    field: &CoefficientField,
    nodal: &[f64],
    v: usize,
) -> Result<f64, FemError> {
    let node = mesh
        .vertex_node(v)
        .ok_or_else(|| FemError::VertexNotInMesh(g.vertex_id(v).to_string()))?;
    if mesh.is_constrained(node) {
        return Err(FemError::ConstrainedVertex(g.vertex_id(v).to_string()));
    }
    let mut flux = 0.0;
    for &c in mesh.node_cells(node) {
        let cell = mesh.cells()[c];
        let other = if cell.nodes[0] == node { cell.nodes[1] } else { cell.nodes[0] };
        let len = cell.len();
        let p_avg = field.edge_integral(cell.edge, crate::coeff::Integrand::P, cell.a, cell.b)? / len;
        flux += p_avg * (nodal[other] - nodal[node]) / len;
    }
    Ok(flux.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coefficient, CoefficientSpec};
    use crate::graph::families;

    fn forms(g: &MetricGraph, field: &CoefficientField, h: f64, bc: BoundaryCondition) -> AssembledForms {
        let (pieces, spec) = whole_graph(g, bc);
        let mesh = GraphMesh::build(g, &pieces, h, &spec, DomainTag::WholeGraph).unwrap();
        assemble(Arc::new(mesh), field).unwrap()
    }

    #[test]
    fn single_cell_reference_matrices() {
        let g = families::path(1, 1.0);
        let field = CoefficientField::free(&g);
        let f = forms(&g, &field, 1.0, BoundaryCondition::Free);
        let [kp, kq, m] = f.full_matrices().clone();
        assert_eq!(kp.to_dense(), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(kq.nnz(), 4);
        assert!(kq.max_abs() == 0.0);
        let md = m.to_dense();
        assert!((md[0][0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((md[0][1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn forms_are_exactly_symmetric() {
        let g = families::star(3, 1.0);
        let mut field = CoefficientField::free(&g);
        field.set(1, Coefficient::P, CoefficientSpec::expr("1 + x^2").unwrap());
        field.set(2, Coefficient::Q, CoefficientSpec::piecewise(vec![(0.0, -2.0), (0.3, 4.0)]).unwrap());
        let f = forms(&g, &field, 0.07, BoundaryCondition::Dirichlet);
        for a in [&f.k_p, &f.k_q, &f.m] {
            assert_eq!(a.asymmetry(), 0.0);
        }
    }

    #[test]
    fn mass_sums_to_total_weight() {
        let g = families::path(2, 1.5);
        let mut field = CoefficientField::free(&g);
        field.set(0, Coefficient::W, CoefficientSpec::Constant(2.0));
        let f = forms(&g, &field, 0.1, BoundaryCondition::Free);
        let ones = vec![1.0; f.mesh().node_count()];
        let (kp, kq, mass) = f.energies(&ones);
        assert!(kp.abs() < 1e-12);
        assert_eq!(kq, 0.0);
        assert!((mass - 4.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_vanishing_weight() {
        let g = families::path(1, 1.0);
        let mut field = CoefficientField::free(&g);
        field.set(0, Coefficient::W, CoefficientSpec::Constant(0.0));
        let (pieces, spec) = whole_graph(&g, BoundaryCondition::Dirichlet);
        let mesh = GraphMesh::build(&g, &pieces, 0.1, &spec, DomainTag::WholeGraph).unwrap();
        assert!(matches!(
            assemble(Arc::new(mesh), &field),
            Err(FemError::Coeff(CoeffError::NotPositive { coefficient: "w", .. }))
        ));
    }

    #[test]
    fn kirchhoff_of_linear_flux_balance() {
        // f = 1 - x on all three arms of a star: outgoing slopes sum to -3
        let g = families::star(3, 1.0);
        let field = CoefficientField::free(&g);
        let f = forms(&g, &field, 0.25, BoundaryCondition::Dirichlet);
        let mesh = f.mesh();
        let nodal = mesh.nodal(|loc| match loc {
            NodeLocation::Vertex(0) => 1.0,
            NodeLocation::Vertex(_) => 0.0,
            NodeLocation::Interior { offset, .. } | NodeLocation::Cut { offset, .. } => 1.0 - offset,
        });
        let r = kirchhoff_residual(&g, mesh, &field, &nodal, 0).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        assert!(matches!(
            kirchhoff_residual(&g, mesh, &field, &nodal, 1),
            Err(FemError::ConstrainedVertex(_))
        ));
    }
}
