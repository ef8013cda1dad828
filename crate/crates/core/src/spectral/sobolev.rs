use std::collections::BTreeMap;

use super::SpectralError;
use crate::coeff::{CoefficientField, Integrand};
use crate::fem::GraphMesh;
use crate::graph::MetricGraph;

/// Constants for `|f(x)|² ≤ ε ∫_e p|f'|² + C_ε ∫_e w|f|²` on every edge `e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevEstimate {
    pub epsilon: f64,
    /// Window length: every within-edge window of this length carries
    /// `∫ 1/p < ε/2`.
    pub delta: f64,
    /// Smallest `∫ w` over within-edge windows of length `δ/2`.
    pub c: f64,
    /// `2 / c`.
    pub c_epsilon: f64,
}

/// Window starts sampled per edge, on top of the breakpoint-aligned ones.
const WINDOW_SAMPLES: usize = 64;
/// `δ` is searched on the dyadic grid `k · (d_*/2) / 2^DYADIC_BITS`, which makes
/// the result exactly monotone in `ε`.
const DYADIC_BITS: u32 = 40;

fn window_starts(field: &CoefficientField, edge: usize, width: f64) -> Vec<f64> {
    let len = field.edge_length(edge);
    let room = (len - width).max(0.0);
    let mut starts: Vec<f64> = (0..=WINDOW_SAMPLES)
        .map(|i| room * i as f64 / WINDOW_SAMPLES as f64)
        .collect();
    // extrema of window integrals of piecewise-constant data sit where a
    // window end meets a breakpoint
    for b in field.sample_points(edge, 1) {
        for s in [b, b - width] {
            if (0.0..=room).contains(&s) {
                starts.push(s);
            }
        }
    }
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    starts
}

fn window_extreme(
    g: &MetricGraph,
    field: &CoefficientField,
    which: Integrand,
    width: f64,
    pick: fn(f64, f64) -> f64,
    init: f64,
) -> Result<f64, SpectralError> {
    let mut acc = init;
    for e in 0..g.edge_count() {
        for s in window_starts(field, e, width) {
            let end = (s + width).min(field.edge_length(e));
            acc = pick(acc, field.edge_integral(e, which, s, end)?);
        }
    }
    Ok(acc)
}

pub fn sobolev_constant(
    g: &MetricGraph,
    field: &CoefficientField,
    epsilon: f64,
) -> Result<SobolevEstimate, SpectralError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(SpectralError::InvalidEpsilon(epsilon));
    }
    let cap = 0.5 * g.min_edge_length();
    let steps = 1u64 << DYADIC_BITS;
    let delta_at = |k: u64| cap * (k as f64) / (steps as f64);
    let worst = |delta: f64| window_extreme(g, field, Integrand::InvP, delta, f64::max, 0.0);
    let admissible = |delta: f64| -> Result<bool, SpectralError> { Ok(worst(delta)? < 0.5 * epsilon) };

    // largest k in [1, steps) with an admissible window length
    if !admissible(delta_at(1))? {
        return Err(SpectralError::NoAdmissibleDelta {
            epsilon,
            smallest: delta_at(1),
            value: worst(delta_at(1))?,
        });
    }
    let (mut lo, mut hi) = (1u64, steps);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if admissible(delta_at(mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = delta_at(lo);
    let c = window_extreme(g, field, Integrand::W, 0.5 * delta, f64::min, f64::INFINITY)?;
    Ok(SobolevEstimate {
        epsilon,
        delta,
        c,
        c_epsilon: 2.0 / c,
    })
}

/// Largest `sup_e |f|² - (ε ∫_e p|f'|² + C_ε ∫_e w|f|²)` over the edges of
/// a mesh, for a continuous piecewise-linear `f` given by nodal values. The
/// inequality holds for `f` when the result is `≤ 0`.
pub fn sobolev_gap(
    field: &CoefficientField,
    mesh: &GraphMesh,
    nodal: &[f64],
    est: &SobolevEstimate,
) -> Result<f64, SpectralError> {
    let mut per_edge: BTreeMap<usize, (f64, f64, f64)> = BTreeMap::new();
    for cell in mesh.cells() {
        let [i, j] = cell.nodes;
        let (fa, fb) = (nodal[i], nodal[j]);
        let len = cell.len();
        let slope = (fb - fa) / len;
        let mut grad = 0.0;
        let mut mass = 0.0;
        field.visit_nodes(cell.edge, cell.a, cell.b, |x, wt, s| {
            let v = fa + (x - cell.a) / len * (fb - fa);
            grad += wt * s.p * slope * slope;
            mass += wt * s.w * v * v;
        })?;
        let entry = per_edge.entry(cell.edge).or_insert((0.0, 0.0, 0.0));
        entry.0 = entry.0.max(fa * fa).max(fb * fb);
        entry.1 += grad;
        entry.2 += mass;
    }
    Ok(per_edge
        .values()
        .map(|&(sup, grad, mass)| sup - (est.epsilon * grad + est.c_epsilon * mass))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coefficient, CoefficientSpec};
    use crate::graph::families;

    #[test]
    fn unit_coefficients_hand_values() {
        let g = families::star(3, 1.0);
        let f = CoefficientField::free(&g);
        let s = sobolev_constant(&g, &f, 1.0).unwrap();
        assert!(s.delta < 0.5 && s.delta > 0.5 - 1e-9);
        assert!((s.c - s.delta / 2.0).abs() < 1e-14);
        assert!((s.c_epsilon - 8.0).abs() < 1e-6);
        assert_eq!(s.c_epsilon, 2.0 / s.c);
    }

    #[test]
    fn small_epsilon_limits_delta() {
        let g = families::path(2, 1.0);
        let f = CoefficientField::free(&g);
        let s = sobolev_constant(&g, &f, 0.2).unwrap();
        // ∫ 1/p over a window is its length, so δ approaches ε/2 from below
        assert!(s.delta < 0.1 && s.delta > 0.1 - 1e-9);
    }

    #[test]
    fn piecewise_weight_minimum() {
        let g = families::path(1, 2.0);
        let mut f = CoefficientField::free(&g);
        f.set(0, Coefficient::W, CoefficientSpec::piecewise(vec![(0.0, 1.0), (1.0, 0.25)]).unwrap());
        let s = sobolev_constant(&g, &f, 4.0).unwrap();
        assert!((s.c - 0.25 * s.delta / 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_epsilon() {
        let g = families::path(1, 1.0);
        let f = CoefficientField::free(&g);
        assert!(matches!(
            sobolev_constant(&g, &f, 0.0),
            Err(SpectralError::InvalidEpsilon(_))
        ));
    }
}
