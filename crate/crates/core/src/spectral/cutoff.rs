use super::{check_level, SpectralError};
use crate::coeff::{CoefficientField, Integrand};
use crate::graph::{Exhaustion, MetricGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffShape {
    /// Edge of `Γ_n`.
    Zero,
    /// Edge outside `Γ̃_n`.
    One,
    /// Halo edge; `inner_at_start` tells whether `o(e)` lies in `Γ_n`, and
    /// `total = ∫_e sqrt(w/p)`.
    Halo { inner_at_start: bool, total: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEdge {
    pub edge: usize,
    pub shape: CutoffShape,
}

/// `φ_n`: zero on `Γ_n`, one outside `Γ̃_n`, and on a halo edge the
/// normalized `sqrt(w/p)`-length measured from the end inside `Γ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffFunction {
    pub level: usize,
    pub edges: Vec<CutoffEdge>,
    /// Sampled `sup |sqrt(p/w) φ'|` over halo edges.
    pub sup_scaled_derivative: f64,
}

const SUP_SAMPLES: usize = 64;

pub fn cutoff_build(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
) -> Result<CutoffFunction, SpectralError> {
    check_level(exhaustion, n)?;
    let extended = exhaustion.level(n).len() + exhaustion.halo(n).len();
    if extended == g.edge_count() {
        return Err(SpectralError::CutoffCoversHost(n));
    }
    let mut edges = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        let edge = g.edge(e);
        let a = exhaustion.vertex_in_level(n, edge.from);
        let b = exhaustion.vertex_in_level(n, edge.to);
        let shape = match (a, b) {
            (true, true) => CutoffShape::Zero,
            (false, false) => CutoffShape::One,
            (inner_at_start, _) => {
                let total = field.edge_integral(e, Integrand::SqrtWOverP, 0.0, edge.length)?;
                if !(total > 0.0) || !total.is_finite() {
                    return Err(SpectralError::DegenerateHaloEdge(edge.id.clone()));
                }
                CutoffShape::Halo { inner_at_start, total }
            }
        };
        edges.push(CutoffEdge { edge: e, shape });
    }
    let mut phi = CutoffFunction {
        level: n,
        edges,
        sup_scaled_derivative: 0.0,
    };
    let mut sup: f64 = 0.0;
    for e in exhaustion.halo(n) {
        for x in field.sample_points(*e, SUP_SAMPLES) {
            sup = sup.max(phi.scaled_derivative(field, *e, x).abs());
        }
    }
    phi.sup_scaled_derivative = sup;
    Ok(phi)
}

impl CutoffFunction {
    pub fn value(&self, field: &CoefficientField, edge: usize, x: f64) -> Result<f64, SpectralError> {
        Ok(match self.edges[edge].shape {
            CutoffShape::Zero => 0.0,
            CutoffShape::One => 1.0,
            CutoffShape::Halo { inner_at_start, total } => {
                let len = field.edge_length(edge);
                let x = x.clamp(0.0, len);
                // the stretch from x to the end outside Γ_n
                let rest = if inner_at_start {
                    field.edge_integral(edge, Integrand::SqrtWOverP, x, len)?
                } else {
                    field.edge_integral(edge, Integrand::SqrtWOverP, 0.0, x)?
                };
                (1.0 - rest / total).clamp(0.0, 1.0)
            }
        })
    }

    /// `sqrt(p/w) φ'` at `x`, with `φ'` the derivative along the edge
    /// orientation.
    pub fn scaled_derivative(&self, field: &CoefficientField, edge: usize, x: f64) -> f64 {
        match self.edges[edge].shape {
            CutoffShape::Zero | CutoffShape::One => 0.0,
            CutoffShape::Halo { inner_at_start, total } => {
                let s = field.sample(edge, x);
                let slope = (s.w / s.p).sqrt() / total;
                let sign = if inner_at_start { 1.0 } else { -1.0 };
                sign * (s.p.sqrt() / s.w.sqrt()) * slope
            }
        }
    }

    pub fn halo_edges(&self) -> impl Iterator<Item = &CutoffEdge> {
        self.edges
            .iter()
            .filter(|e| matches!(e.shape, CutoffShape::Halo { .. }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coefficient, CoefficientSpec};
    use crate::graph::families;

    #[test]
    fn unit_halo_edge_is_linear() {
        let g = families::path(3, 1.0);
        let f = CoefficientField::free(&g);
        let ex = Exhaustion::build(&g, 0, 3).unwrap();
        let phi = cutoff_build(&g, &f, &ex, 1).unwrap();
        assert_eq!(phi.edges[0].shape, CutoffShape::Zero);
        assert_eq!(phi.edges[2].shape, CutoffShape::One);
        for x in [0.0, 0.25, 0.5, 1.0] {
            assert!((phi.value(&f, 1, x).unwrap() - x).abs() < 1e-14);
        }
        assert!((phi.sup_scaled_derivative - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_ratio_cancels() {
        let g = families::path(3, 1.0);
        let mut f = CoefficientField::free(&g);
        for e in 0..3 {
            f.set(e, Coefficient::P, CoefficientSpec::Constant(4.0));
        }
        let ex = Exhaustion::build(&g, 0, 3).unwrap();
        let phi = cutoff_build(&g, &f, &ex, 1).unwrap();
        assert!((phi.value(&f, 1, 0.3).unwrap() - 0.3).abs() < 1e-14);
        assert!((phi.sup_scaled_derivative - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_halo_edge() {
        // edge e0 runs v1 -> v0 here, so its inner end is t(e)
        let g = crate::graph::MetricGraph::from_json(
            r#"{"vertices":["v0","v1","v2"],"edges":[
                {"id":"a","from":"v1","to":"v0","length":1},
                {"id":"b","from":"v1","to":"v2","length":1}],"root":"v0"}"#,
        )
        .unwrap();
        let f = CoefficientField::free(&g);
        let ex = Exhaustion::build(&g, 0, 2).unwrap();
        let phi = cutoff_build(&g, &f, &ex, 0).unwrap();
        assert_eq!(phi.value(&f, 0, 1.0).unwrap(), 0.0);
        assert_eq!(phi.value(&f, 0, 0.0).unwrap(), 1.0);
        assert!((phi.scaled_derivative(&f, 0, 0.5) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn covering_halo_is_rejected() {
        let g = families::path(2, 1.0);
        let f = CoefficientField::free(&g);
        let ex = Exhaustion::build(&g, 0, 2).unwrap();
        assert!(matches!(
            cutoff_build(&g, &f, &ex, 1),
            Err(SpectralError::CutoffCoversHost(1))
        ));
    }
}
