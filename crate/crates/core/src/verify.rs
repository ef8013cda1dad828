//! Runtime property suite: exact pencil identities, solver cross-checks and
//! the contracts of the spectral procedures, evaluated on caller-supplied
//! graphs with a seeded generator.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::CoefficientField;
use crate::eig::{dense, smallest_eigenpair, Pencil};
use crate::fem::{assemble, subgraph, whole_graph, BoundaryCondition, DomainTag, GraphMesh, NodeLocation};
use crate::graph::{Exhaustion, MetricGraph};
use crate::spectral::{
    ap_check, cutoff_build, level_bottom, sobolev_constant, sobolev_gap, ApOutcome, SpectralOptions,
};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub spectral: SpectralOptions,
    /// `c` in `q → q + c·w`.
    pub shift_c: f64,
    /// `c` in `(p, q, w) → (cp, cq, cw)`.
    pub scale_c: f64,
    pub ap_samples: usize,
    pub sobolev_samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            spectral: SpectralOptions {
                h: 0.05,
                ..Default::default()
            },
            shift_c: 7.0,
            scale_c: 0.3,
            ap_samples: 20,
            sobolev_samples: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyCase {
    pub name: String,
    pub graph: MetricGraph,
    pub field: CoefficientField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub case: String,
    pub property: &'static str,
    pub passed: bool,
    pub measured: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Largest DOF count handed to the dense reference.
pub const DENSE_LIMIT: usize = 200;

fn whole_pencil(g: &MetricGraph, field: &CoefficientField, opts: &SpectralOptions) -> Result<Pencil, Error> {
    let (pieces, spec) = whole_graph(g, opts.bc);
    let mesh = GraphMesh::build(g, &pieces, opts.h, &spec, DomainTag::WholeGraph)?;
    Ok(Pencil::from_forms(&assemble(Arc::new(mesh), field)?))
}

/// Smallest level whose `Γ_n` is the whole host graph.
pub fn covering_level(g: &MetricGraph, root: usize) -> usize {
    let far = g.vertex_distances(root).into_iter().fold(0.0, f64::max);
    (far - 1e-9).ceil().max(0.0) as usize
}

/// Largest level up to `top` whose Dirichlet problem has constrained
/// vertices, which positive solutions need as boundary data. A host without
/// boundary vertices (or with Kirchhoff conditions there) has none at its
/// covering level.
pub fn certificate_level(g: &MetricGraph, ex: &Exhaustion, top: usize, bc: BoundaryCondition) -> Option<usize> {
    (1..=top.min(ex.max_level()))
        .rev()
        .find(|&n| !ex.level(n).is_empty() && !subgraph(g, ex.level(n), bc).1.vertices().is_empty())
}

fn check(case: &str, property: &'static str, passed: bool, measured: String) -> PropertyCheck {
    PropertyCheck {
        case: case.to_string(),
        property,
        passed,
        measured,
    }
}

fn run_case(case: &VerifyCase, opts: &VerifyOptions, rng: &mut ChaCha8Rng) -> Result<Vec<PropertyCheck>, Error> {
    let (g, field, name) = (&case.graph, &case.field, case.name.as_str());
    let sopts = &opts.spectral;
    let mut out = Vec::new();

    let pencil = whole_pencil(g, field, sopts)?;
    let asym = pencil.k.asymmetry().max(pencil.m.asymmetry());
    out.push(check(name, "pencil symmetry", asym == 0.0, format!("max |A - Aᵀ| = {asym:e}")));

    let base = smallest_eigenpair(&pencil, &sopts.eig)?;
    let recomputed = pencil.residual(base.lambda, &base.vector);
    out.push(check(
        name,
        "residual recomputation",
        (recomputed - base.residual).abs() <= 1e-14,
        format!("reported {:.3e}, recomputed {:.3e}", base.residual, recomputed),
    ));

    if pencil.dim() <= DENSE_LIMIT {
        let (reference, _) = dense::smallest(&pencil)?;
        let gap = (base.lambda - reference).abs();
        let allowed = sopts.eig.tol.max(1e-10) * reference.abs().max(1.0);
        out.push(check(
            name,
            "dense reference agreement",
            gap <= allowed,
            format!("|λ - λ_dense| = {gap:.3e} (allowed {allowed:.1e}, {} DOFs)", pencil.dim()),
        ));
    }

    let shifted = whole_pencil(g, &field.q_shifted(opts.shift_c), sopts)?;
    let moved = smallest_eigenpair(&shifted, &sopts.eig)?.lambda - base.lambda;
    let err = (moved - opts.shift_c).abs();
    out.push(check(
        name,
        "q-shift identity",
        err <= 1e-12 * base.lambda.abs().max(1.0),
        format!("shift {moved:.15} for c = {}", opts.shift_c),
    ));

    let scaled = whole_pencil(g, &field.scaled(opts.scale_c), sopts)?;
    let lambda_scaled = smallest_eigenpair(&scaled, &sopts.eig)?.lambda;
    let rel = (lambda_scaled - base.lambda).abs() / base.lambda.abs().max(1.0);
    out.push(check(
        name,
        "coefficient scaling invariance",
        rel <= 1e-12,
        format!("relative change {rel:.3e} for c = {}", opts.scale_c),
    ));

    let root = g.root();
    let top = covering_level(g, root);
    let ex = Exhaustion::build(g, root, top.max(1))?;

    // extra Dirichlet condition at the root never lowers λ₁
    if !g.is_boundary(root) || sopts.bc == BoundaryCondition::Free {
        let (pieces, mut spec) = whole_graph(g, sopts.bc);
        spec.inner.push(root);
        let mesh = GraphMesh::build(g, &pieces, sopts.h, &spec, DomainTag::WholeGraph)?;
        let forms = assemble(Arc::new(mesh), field)?;
        if forms.free_count() > 0 {
            let pinned = smallest_eigenpair(&Pencil::from_forms(&forms), &sopts.eig)?.lambda;
            out.push(check(
                name,
                "domain monotonicity",
                pinned >= base.lambda - 10.0 * sopts.tol,
                format!("λ₁ {} → {} with the root pinned", base.lambda, pinned),
            ));
        }
    }

    if let Some(level) = certificate_level(g, &ex, top, sopts.bc) {
        let lambda1 = level_bottom(g, field, &ex, level, sopts)?.lambda;
        let mut contradictions = 0;
        let mut certificates = 0;
        let mut min_positive = f64::INFINITY;
        for _ in 0..opts.ap_samples {
            let lambda = lambda1 + rng.gen_range(-2.0..2.0) * (1.0 + lambda1.abs()) * 0.5;
            let outcome = ap_check(g, field, &ex, lambda, level, sopts)?;
            let ok = match &outcome {
                ApOutcome::Certificate(c) => {
                    certificates += 1;
                    min_positive = min_positive.min(c.min_val);
                    lambda < lambda1 - sopts.tol && c.min_val > 0.0
                }
                ApOutcome::Refutation { .. } => lambda > lambda1 + sopts.tol,
                ApOutcome::Indeterminate { .. } => (lambda - lambda1).abs() <= sopts.tol,
            };
            if !ok {
                contradictions += 1;
            }
        }
        out.push(check(
            name,
            "positive-solution consistency",
            contradictions == 0,
            format!(
                "{contradictions} contradictions in {} trials, {certificates} certificates, min value {min_positive:.4}",
                opts.ap_samples
            ),
        ));
    }

    if let Ok(phi) = cutoff_build(g, field, &ex, 0) {
        let mut worst_range: f64 = 0.0;
        let mut worst_slope: f64 = 0.0;
        let mut endpoints_exact = true;
        for e in phi.halo_edges() {
            let len = g.edge(e.edge).length;
            let inner_start = ex.vertex_in_level(0, g.edge(e.edge).from);
            let (v0, v1) = (phi.value(field, e.edge, 0.0)?, phi.value(field, e.edge, len)?);
            endpoints_exact &= if inner_start { v0 == 0.0 && v1 == 1.0 } else { v0 == 1.0 && v1 == 0.0 };
            let reference = phi.scaled_derivative(field, e.edge, 0.0);
            for x in field.sample_points(e.edge, 32) {
                let v = phi.value(field, e.edge, x)?;
                worst_range = worst_range.max((-v).max(v - 1.0).max(0.0));
                worst_slope = worst_slope.max((phi.scaled_derivative(field, e.edge, x) - reference).abs());
            }
        }
        out.push(check(
            name,
            "cutoff contract",
            worst_range == 0.0 && endpoints_exact && worst_slope <= 1e-12,
            format!("range excess {worst_range:e}, slope spread {worst_slope:.2e}, exact endpoints {endpoints_exact}"),
        ));
    }

    match sobolev_constant(g, field, 1.0) {
        Ok(est) => {
            let (pieces, spec) = whole_graph(g, BoundaryCondition::Free);
            let mesh = GraphMesh::build(g, &pieces, sopts.h, &spec, DomainTag::WholeGraph)?;
            let mut violations = 0;
            let mut worst = f64::NEG_INFINITY;
            for k in 0..opts.sobolev_samples {
                let nodal = random_function(&mesh, rng, k);
                let gap = sobolev_gap(field, &mesh, &nodal, &est)?;
                worst = worst.max(gap);
                if gap > 0.0 {
                    violations += 1;
                }
            }
            out.push(check(
                name,
                "Sobolev inequality",
                violations == 0,
                format!(
                    "{violations} violations in {} functions, C_ε = {:.6}, worst gap {worst:.3e}",
                    opts.sobolev_samples, est.c_epsilon
                ),
            ));
        }
        Err(e) => out.push(check(name, "Sobolev inequality", false, e.to_string())),
    }
    Ok(out)
}

/// Random continuous piecewise-linear function: alternately rough nodal
/// noise, a smooth profile, and a narrow spike.
pub fn random_function(mesh: &GraphMesh, rng: &mut impl Rng, k: usize) -> Vec<f64> {
    match k % 3 {
        0 => (0..mesh.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        1 => {
            let (a, b, c) = (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..6.0),
                rng.gen_range(-1.0..1.0),
            );
            mesh.nodal(|loc| {
                let x = match loc {
                    NodeLocation::Vertex(v) => v as f64 * 0.37,
                    NodeLocation::Interior { edge, offset } | NodeLocation::Cut { edge, offset } => {
                        edge as f64 * 0.37 + offset
                    }
                };
                a * (b * x).sin() + c
            })
        }
        _ => {
            let peak = rng.gen_range(0..mesh.node_count());
            let height = rng.gen_range(0.5..3.0);
            let mut f = vec![0.0; mesh.node_count()];
            f[peak] = height;
            f
        }
    }
}

pub fn run_suite(cases: &[VerifyCase], opts: &VerifyOptions) -> Result<VerifyReport, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = Vec::new();
    for case in cases {
        checks.extend(run_case(case, opts, &mut rng)?);
    }
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;

    #[test]
    fn suite_passes_on_small_star() {
        let g = families::star(3, 1.0);
        let field = CoefficientField::free(&g);
        let cases = [VerifyCase {
            name: "star".into(),
            graph: g,
            field,
        }];
        let opts = VerifyOptions {
            sobolev_samples: 30,
            ap_samples: 5,
            ..Default::default()
        };
        let report = run_suite(&cases, &opts).unwrap();
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{failures:#?}");
    }
}
