use std::fmt;

use super::field::{CoefficientField, Integrand};
use crate::graph::MetricGraph;

/// Declared exponent `η` with `1/p ∈ L^η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrabilityExponent {
    Finite(f64),
    Infinite,
}

impl Default for IntegrabilityExponent {
    fn default() -> Self {
        IntegrabilityExponent::Finite(1.0)
    }
}

impl fmt::Display for IntegrabilityExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrabilityExponent::Finite(e) => write!(f, "{e}"),
            IntegrabilityExponent::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub number: u8,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of checking the four conditions required by the essential
/// spectrum machinery:
///
/// 1. `1/p ∈ L^η`, `q, w ∈ L¹_loc`;
/// 2. `C_w = ess inf w > 0` outside a compact subgraph;
/// 3. `d_* = inf |e| > 0`;
/// 4. `C_q = sup_e ∫_e q₋ < ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub eta: IntegrabilityExponent,
    pub c_q: f64,
    pub c_w: f64,
    pub d_star_low: f64,
    pub d_star_high: f64,
    pub clauses: [Clause; 4],
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    /// True when clauses 1 through 3 pass (what the Sobolev estimate needs).
    pub fn local_pass(&self) -> bool {
        self.clauses[..3].iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| !c.passed)
    }

    pub fn summary(&self) -> String {
        let flags: Vec<String> = self
            .clauses
            .iter()
            .map(|c| format!("({})={}", c.number, if c.passed { "pass" } else { "FAIL" }))
            .collect();
        format!(
            "eta={} C_q={} C_w={} d_*={} d^*={} clauses {}",
            self.eta,
            self.c_q,
            self.c_w,
            self.d_star_low,
            self.d_star_high,
            flags.join(" ")
        )
    }
}

/// Checks the coefficient hypotheses on `g`. `compact` lists the edges of the
/// compact subgraph excluded from the infimum of `w`; `samples_per_edge`
/// controls the density of the sampled infimum.
pub fn validate_hypotheses(
    g: &MetricGraph,
    field: &CoefficientField,
    compact: &[usize],
    eta: IntegrabilityExponent,
    samples_per_edge: usize,
) -> HypothesisReport {
    let mut local_problems = Vec::new();
    let mut c_q: f64 = 0.0;
    let mut c_w = f64::INFINITY;

    for e in 0..g.edge_count() {
        let len = g.edge(e).length;
        let id = &g.edge(e).id;
        let pts = field.sample_points(e, samples_per_edge);

        // (1): local integrability of 1/p, q, w and the declared exponent
        let inv_p = match eta {
            IntegrabilityExponent::Finite(h) => field
                .integrate_with(e, 0.0, len, |_, s| (1.0 / s.p).powf(h))
                .map_err(|err| err.to_string()),
            IntegrabilityExponent::Infinite => {
                let sup = pts
                    .iter()
                    .map(|&x| 1.0 / field.sample(e, x).p)
                    .fold(0.0, f64::max);
                Ok(sup)
            }
        };
        match inv_p {
            Ok(v) if v.is_finite() && v >= 0.0 => {}
            Ok(v) => local_problems.push(format!("edge `{id}`: 1/p norm {v}")),
            Err(msg) => local_problems.push(format!("edge `{id}`: 1/p: {msg}")),
        }
        if pts.iter().any(|&x| !(field.sample(e, x).p > 0.0)) {
            local_problems.push(format!("edge `{id}`: p not positive"));
        }
        for which in [Integrand::Q, Integrand::W] {
            match field.integrate_with(e, 0.0, len, |_, s| which.of(s).abs()) {
                Ok(v) if v.is_finite() => {}
                Ok(v) => local_problems.push(format!("edge `{id}`: ∫|{}| = {v}", which.name())),
                Err(err) => local_problems.push(format!("edge `{id}`: {}: {err}", which.name())),
            }
        }

        // (4)
        let qm = field
            .edge_integral(e, Integrand::QMinus, 0.0, len)
            .unwrap_or(f64::INFINITY);
        c_q = c_q.max(if qm.is_nan() { f64::INFINITY } else { qm });

        // (2)
        if !compact.contains(&e) {
            for &x in &pts {
                let w = field.sample(e, x).w;
                c_w = c_w.min(if w.is_nan() { f64::NEG_INFINITY } else { w });
            }
        }
    }

    let d_star_low = g.min_edge_length();
    let d_star_high = g.max_edge_length();
    let clauses = [
        Clause {
            number: 1,
            passed: local_problems.is_empty(),
            detail: if local_problems.is_empty() {
                format!("1/p in L^{eta}, q and w locally integrable")
            } else {
                local_problems.join("; ")
            },
        },
        Clause {
            number: 2,
            passed: c_w > 0.0,
            detail: format!("C_w = {c_w} (sampled infimum of w outside the compact subgraph)"),
        },
        Clause {
            number: 3,
            passed: d_star_low > 0.0,
            detail: format!("d_* = {d_star_low}"),
        },
        Clause {
            number: 4,
            passed: c_q.is_finite(),
            detail: format!("C_q = {c_q} (sup over edges of the integral of q-)"),
        },
    ];
    HypothesisReport {
        eta,
        c_q,
        c_w,
        d_star_low,
        d_star_high,
        clauses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Coefficient, CoefficientSpec};
    use crate::graph::families;

    #[test]
    fn free_field_passes_everything() {
        let g = families::ladder(4, 1.0);
        let f = CoefficientField::free(&g);
        let r = validate_hypotheses(&g, &f, &[], IntegrabilityExponent::default(), 16);
        assert_eq!(r.c_q, 0.0);
        assert_eq!(r.c_w, 1.0);
        assert!(r.all_pass());
    }

    #[test]
    fn single_well_sets_c_q() {
        let g = families::path(4, 1.0);
        let mut f = CoefficientField::free(&g);
        f.set(0, Coefficient::Q, CoefficientSpec::Constant(-5.0));
        let r = validate_hypotheses(&g, &f, &[], IntegrabilityExponent::Infinite, 16);
        assert!((r.c_q - 5.0).abs() < 1e-12);
        assert!(r.all_pass());
    }

    #[test]
    fn decaying_weight_infimum_matches_dense_sampling() {
        let g = families::path(4, 1.0);
        let f = CoefficientField::uniform(
            &g,
            CoefficientSpec::Constant(1.0),
            CoefficientSpec::Constant(0.0),
            CoefficientSpec::expr("exp(-x)").unwrap(),
        );
        let r = validate_hypotheses(&g, &f, &[0], IntegrabilityExponent::default(), 64);
        // oracle: dense scan of exp(-x) over [0, 1] on each later edge
        let oracle = (0..=10_000)
            .map(|i| (-(i as f64) / 10_000.0).exp())
            .fold(f64::INFINITY, f64::min);
        assert!((r.c_w - oracle).abs() < 1e-15);
        assert!((r.c_w - 0.3679).abs() < 1e-4);
    }

    #[test]
    fn vanishing_weight_fails_clause_two() {
        let g = families::path(3, 1.0);
        let mut f = CoefficientField::free(&g);
        f.set(2, Coefficient::W, CoefficientSpec::Constant(0.0));
        let r = validate_hypotheses(&g, &f, &[], IntegrabilityExponent::default(), 8);
        let failed: Vec<u8> = r.failures().map(|c| c.number).collect();
        assert_eq!(failed, vec![2]);
        // inside the compact subgraph it no longer matters
        let r = validate_hypotheses(&g, &f, &[2], IntegrabilityExponent::default(), 8);
        assert!(r.all_pass());
    }

    #[test]
    fn singular_inverse_p_fails_clause_one() {
        let g = families::path(1, 1.0);
        let mut f = CoefficientField::free(&g);
        f.set(0, Coefficient::P, CoefficientSpec::Constant(0.0));
        let r = validate_hypotheses(&g, &f, &[], IntegrabilityExponent::Finite(2.0), 8);
        assert!(!r.clauses[0].passed);
        assert!(r.clauses[1].passed);
    }
}
