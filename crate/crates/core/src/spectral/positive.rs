use std::sync::Arc;

use super::{check_level, level_forms, solve, SpectralError, SpectralOptions};
use crate::coeff::CoefficientField;
use crate::fem::{kirchhoff_residual, GraphMesh, NodeLocation};
use crate::graph::{Exhaustion, MetricGraph};
use crate::sparse::{FactorError, Ldl};

/// A discrete solution of `ly = λy` on `Γ_n`, positive at every node.
#[derive(Debug, Clone)]
pub struct PositiveSolutionCert {
    pub lambda: f64,
    pub level: usize,
    /// Dirichlet bottom `λ₁(Γ_n)` the trial value was compared against.
    pub lambda1: f64,
    mesh: Arc<GraphMesh>,
    /// Values at every mesh node, normalized so that `y(o) = 1`.
    pub values: Vec<f64>,
    pub min_val: f64,
    pub max_val: f64,
    /// `(vertex, |Σ p y'|)` at each unconstrained vertex.
    pub kirchhoff: Vec<(usize, f64)>,
    pub positive: bool,
}

impl PositiveSolutionCert {
    pub fn mesh(&self) -> &GraphMesh {
        &self.mesh
    }

    pub fn max_kirchhoff_residual(&self) -> f64 {
        self.kirchhoff.iter().map(|&(_, r)| r).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub enum ApOutcome {
    /// `λ < λ₁ - tol`: a positive solution exists on `Γ_n`.
    Certificate(Box<PositiveSolutionCert>),
    /// `λ > λ₁ + tol`.
    Refutation { lambda: f64, lambda1: f64 },
    /// `|λ - λ₁| ≤ tol`.
    Indeterminate { lambda: f64, lambda1: f64 },
}

impl ApOutcome {
    pub fn lambda1(&self) -> f64 {
        match self {
            ApOutcome::Certificate(c) => c.lambda1,
            ApOutcome::Refutation { lambda1, .. } | ApOutcome::Indeterminate { lambda1, .. } => *lambda1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ApOutcome::Certificate(_) => "certificate",
            ApOutcome::Refutation { .. } => "refutation",
            ApOutcome::Indeterminate { .. } => "indeterminate",
        }
    }
}

pub fn ap_check(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    lambda: f64,
    n: usize,
    opts: &SpectralOptions,
) -> Result<ApOutcome, SpectralError> {
    let forms = level_forms(g, field, exhaustion, n, opts)?;
    let lambda1 = solve(&forms, &opts.eig)?.lambda;
    if lambda < lambda1 - opts.tol {
        let cert = lift_solve(g, field, exhaustion, n, lambda, lambda1, opts, &forms)?;
        Ok(ApOutcome::Certificate(Box::new(cert)))
    } else if lambda > lambda1 + opts.tol {
        Ok(ApOutcome::Refutation { lambda, lambda1 })
    } else {
        Ok(ApOutcome::Indeterminate { lambda, lambda1 })
    }
}

/// Solves `(K - λM) y = 0` on the free nodes of `Γ_n` with `y = 1` on every
/// constrained node, then rescales to `y(o) = 1`.
pub fn positive_solution(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
    lambda: f64,
    opts: &SpectralOptions,
) -> Result<PositiveSolutionCert, SpectralError> {
    let forms = level_forms(g, field, exhaustion, n, opts)?;
    let lambda1 = solve(&forms, &opts.eig)?.lambda;
    if !(lambda < lambda1 - opts.tol) {
        return Err(SpectralError::LambdaTooClose {
            lambda,
            lambda1,
            tol: opts.tol,
        });
    }
    lift_solve(g, field, exhaustion, n, lambda, lambda1, opts, &forms)
}

fn describe(g: &MetricGraph, loc: NodeLocation) -> String {
    match loc {
        NodeLocation::Vertex(v) => format!("vertex `{}`", g.vertex_id(v)),
        NodeLocation::Interior { edge, offset } | NodeLocation::Cut { edge, offset } => {
            format!("edge `{}` at x = {offset}", g.edge(edge).id)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn lift_solve(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
    lambda: f64,
    lambda1: f64,
    opts: &SpectralOptions,
    forms: &crate::fem::AssembledForms,
) -> Result<PositiveSolutionCert, SpectralError> {
    let mesh = forms.mesh();
    if mesh.constrained_count() == 0 {
        return Err(SpectralError::NoBoundaryData);
    }
    let root_node = mesh
        .vertex_node(exhaustion.root())
        .ok_or(SpectralError::RootNotInLevel(n))?;
    let ones = vec![1.0; mesh.constrained_count()];
    let rhs: Vec<f64> = forms.shifted_coupling(lambda).mul_vec(&ones).iter().map(|v| -v).collect();
    let values = if mesh.free_count() == 0 {
        Vec::new()
    } else {
        let factor = Ldl::factor(&forms.shifted(lambda)).map_err(|e| match e {
            FactorError::NonPositivePivot { .. } | FactorError::NotSquare(..) => SpectralError::LambdaTooClose {
                lambda,
                lambda1,
                tol: opts.tol,
            },
        })?;
        factor.solve(&rhs)
    };
    let mut full = mesh.expand(&values, 1.0);
    let scale = full[root_node];
    if !(scale > 0.0) {
        return Err(SpectralError::NegativeNode {
            location: describe(g, NodeLocation::Vertex(exhaustion.root())),
            value: scale,
        });
    }
    full.iter_mut().for_each(|v| *v /= scale);
    full[root_node] = 1.0;
    if let Some((i, &v)) = full.iter().enumerate().find(|&(_, &v)| !(v > 0.0)) {
        return Err(SpectralError::NegativeNode {
            location: describe(g, mesh.nodes()[i]),
            value: v,
        });
    }
    let min_val = full.iter().copied().fold(f64::INFINITY, f64::min);
    let max_val = full.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut kirchhoff = Vec::new();
    for v in mesh.vertices() {
        let node = mesh.vertex_node(v).expect("listed vertex has a node");
        if !mesh.is_constrained(node) {
            kirchhoff.push((v, kirchhoff_residual(g, mesh, field, &full, v)?));
        }
    }
    Ok(PositiveSolutionCert {
        lambda,
        level: n,
        lambda1,
        mesh: forms.mesh_arc(),
        values: full,
        min_val,
        max_val,
        kirchhoff,
        positive: true,
    })
}

/// Compares `∫ p|η'|² + q|η|²` with `∫ p|g'|²y² + λ w|g|²y²` for `g = η/y`
/// (nodal quotient, linearly interpolated). Returns `|L - R| / (|L| + 1)`.
pub fn ground_state_transform_check(
    field: &CoefficientField,
    cert: &PositiveSolutionCert,
    trial: &[f64],
) -> Result<f64, SpectralError> {
    let mesh = cert.mesh();
    if trial.len() != mesh.node_count() {
        return Err(SpectralError::TrialLength {
            expected: mesh.node_count(),
            found: trial.len(),
        });
    }
    if let Some(&i) = mesh.constrained_nodes().iter().find(|&&i| trial[i] != 0.0) {
        return Err(SpectralError::TrialNotVanishing(trial[i]));
    }
    if let Some(&v) = cert.values.iter().find(|&&v| !(v > 0.0)) {
        return Err(SpectralError::NegativeNode {
            location: "certificate".into(),
            value: v,
        });
    }
    let lambda = cert.lambda;
    let y = &cert.values;
    let g: Vec<f64> = trial.iter().zip(y).map(|(e, y)| e / y).collect();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for cell in mesh.cells() {
        let [i, j] = cell.nodes;
        let (a, len) = (cell.a, cell.len());
        let d_eta = (trial[j] - trial[i]) / len;
        let d_g = (g[j] - g[i]) / len;
        field.visit_nodes(cell.edge, cell.a, cell.b, |x, wt, s| {
            let t = (x - a) / len;
            let eta = trial[i] + t * (trial[j] - trial[i]);
            let gv = g[i] + t * (g[j] - g[i]);
            let yv = y[i] + t * (y[j] - y[i]);
            lhs += wt * (s.p * d_eta * d_eta + s.q * eta * eta);
            rhs += wt * (s.p * d_g * d_g * yv * yv + lambda * s.w * gv * gv * yv * yv);
        })?;
    }
    Ok((lhs - rhs).abs() / (lhs.abs() + 1.0))
}

/// Empirical Harnack constants on `Γ_m` across a family of certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnackBounds {
    /// `max_n sup_{Γ_m} y_n`.
    pub c_upper: f64,
    /// `min_n inf_{Γ_m} y_n`.
    pub c_lower: f64,
    /// `(n, sup, inf)` per certificate, and the running bounds after it.
    pub per_level: Vec<(usize, f64, f64)>,
    pub running: Vec<(f64, f64)>,
}

pub fn harnack_probe(
    g: &MetricGraph,
    exhaustion: &Exhaustion,
    certs: &[PositiveSolutionCert],
    m: usize,
) -> Result<HarnackBounds, SpectralError> {
    check_level(exhaustion, m)?;
    let first = certs
        .first()
        .ok_or_else(|| SpectralError::MismatchedCertificates("no certificates".into()))?;
    let inner: std::collections::BTreeSet<usize> = exhaustion.level(m).iter().copied().collect();
    let in_compact = |loc: NodeLocation| match loc {
        NodeLocation::Vertex(v) => {
            v == exhaustion.root() || g.incident(v).iter().any(|e| inner.contains(e))
        }
        NodeLocation::Interior { edge, .. } | NodeLocation::Cut { edge, .. } => inner.contains(&edge),
    };
    let mut per_level = Vec::new();
    let mut running = Vec::new();
    let (mut upper, mut lower) = (f64::NEG_INFINITY, f64::INFINITY);
    for c in certs {
        if c.lambda != first.lambda {
            return Err(SpectralError::MismatchedCertificates(format!(
                "λ = {} differs from λ = {}",
                c.lambda, first.lambda
            )));
        }
        if c.level < m {
            return Err(SpectralError::MismatchedCertificates(format!(
                "level {} does not cover Γ_{m}",
                c.level
            )));
        }
        let root = c
            .mesh()
            .vertex_node(exhaustion.root())
            .ok_or(SpectralError::RootNotInLevel(c.level))?;
        if c.values[root] != 1.0 {
            return Err(SpectralError::MismatchedCertificates(format!(
                "level {} has y(o) = {}",
                c.level, c.values[root]
            )));
        }
        let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
        for (loc, &v) in c.mesh().nodes().iter().zip(&c.values) {
            if in_compact(*loc) {
                sup = sup.max(v);
                inf = inf.min(v);
            }
        }
        upper = upper.max(sup);
        lower = lower.min(inf);
        per_level.push((c.level, sup, inf));
        running.push((upper, lower));
    }
    Ok(HarnackBounds {
        c_upper: upper,
        c_lower: lower,
        per_level,
        running,
    })
}
