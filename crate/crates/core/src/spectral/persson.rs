use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{check_level, solve, SpectralError, SpectralOptions};
use crate::coeff::CoefficientField;
use crate::fem::{annulus, assemble, AssembledForms, DomainTag, GraphMesh};
use crate::graph::{Exhaustion, MetricGraph};

/// Inner levels `n` and outer radii `N`; each `n` is paired with every
/// `N > n`, in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct PerssonSchedule {
    pub levels: Vec<usize>,
    pub outer: Vec<usize>,
}

impl PerssonSchedule {
    pub fn validate(&self, max_level: usize) -> Result<(), SpectralError> {
        let bad = |msg: String| Err(SpectralError::InvalidSchedule(msg));
        if self.levels.is_empty() || self.outer.is_empty() {
            return bad("level and outer lists must be nonempty".into());
        }
        for (name, list) in [("levels", &self.levels), ("outer", &self.outer)] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} must be strictly increasing, got {list:?}"));
            }
        }
        let top = *self.outer.last().expect("nonempty");
        if top > max_level {
            return bad(format!("outer radius {top} exceeds the exhaustion depth {max_level}"));
        }
        for &n in &self.levels {
            if !self.outer.iter().any(|&big| big > n) {
                return bad(format!("no outer radius exceeds level {n}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerssonRow {
    pub n: usize,
    pub outer: usize,
    pub lambda: f64,
    pub residual: f64,
    pub dofs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerssonLevel {
    pub n: usize,
    /// Largest outer radius solved for this level.
    pub last_outer: usize,
    /// `λ_{n, last_outer}`, an upper bound for the bottom outside `Γ_n`.
    pub last: f64,
    /// Extrapolation to `N → ∞` assuming `λ_{n,N} - λ_n ∝ (N - n)⁻²`,
    /// clamped to at most `last`.
    pub extrapolated: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerssonTrace {
    /// Ordered by `(n, N)`.
    pub rows: Vec<PerssonRow>,
    pub levels: Vec<PerssonLevel>,
    /// Extrapolated value of the largest level.
    pub estimate: f64,
    /// `[extrapolated, last]` of the largest level.
    pub bracket: (f64, f64),
    pub warnings: Vec<String>,
}

/// Forms on `Γ_N \ Γ_n`, Dirichlet at the interface with `Γ_n`, at the outer
/// cut, and on `∂Γ` when requested.
pub fn annulus_forms(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
    outer: usize,
    opts: &SpectralOptions,
) -> Result<AssembledForms, SpectralError> {
    check_level(exhaustion, n)?;
    check_level(exhaustion, outer)?;
    let (pieces, spec) = annulus(g, exhaustion, n, outer, opts.bc);
    if pieces.is_empty() {
        return Err(SpectralError::EmptyAnnulus { inner: n, outer });
    }
    let mesh = GraphMesh::build(g, &pieces, opts.h, &spec, DomainTag::Complement)?;
    Ok(assemble(Arc::new(mesh), field)?)
}

struct LevelSweep {
    rows: Vec<PerssonRow>,
    level: Option<PerssonLevel>,
    warnings: Vec<String>,
}

fn sweep(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
    outer: &[usize],
    opts: &SpectralOptions,
) -> Result<LevelSweep, SpectralError> {
    let mut rows: Vec<PerssonRow> = Vec::new();
    let mut warnings = Vec::new();
    let mut previous_edges: Option<usize> = None;
    for &big in outer.iter().filter(|&&big| big > n) {
        let edges = exhaustion.level(big).len() - exhaustion.level(n).len();
        if edges == 0 {
            warnings.push(format!("Γ_{big} \\ Γ_{n} is empty; skipped"));
            continue;
        }
        if previous_edges == Some(edges) && exhaustion.covers_host(g, big) {
            warnings.push(format!(
                "Γ_{big} covers the host graph; level {n} stops at N = {}",
                rows.last().map_or(big, |r| r.outer)
            ));
            break;
        }
        previous_edges = Some(edges);
        let forms = annulus_forms(g, field, exhaustion, n, big, opts)?;
        let r = solve(&forms, &opts.eig)?;
        let row = PerssonRow {
            n,
            outer: big,
            lambda: r.lambda,
            residual: r.residual,
            dofs: forms.free_count(),
        };
        let stop = match rows.last() {
            Some(prev) => {
                let drop = prev.lambda - row.lambda;
                if -drop > 10.0 * opts.tol {
                    return Err(SpectralError::Monotonicity(format!(
                        "λ_{{{n},{}}} = {} exceeds λ_{{{n},{}}} = {} by {:.3e}; mesh may be under-resolved",
                        big, row.lambda, prev.outer, prev.lambda, -drop
                    )));
                }
                drop < opts.tol
            }
            None => false,
        };
        rows.push(row);
        if stop {
            break;
        }
    }
    if exhaustion.covers_host(g, rows.last().map_or(n, |r| r.outer)) {
        warnings.push(format!(
            "level {n}: outermost Γ_N covers the host graph, so the annulus is not truncated"
        ));
    }
    let level = rows.last().map(|last| {
        let extrapolated = if rows.len() >= 2 {
            let prev = &rows[rows.len() - 2];
            let l1 = (prev.outer - n) as f64;
            let l2 = (last.outer - n) as f64;
            let r = (l2 * l2 * last.lambda - l1 * l1 * prev.lambda) / (l2 * l2 - l1 * l1);
            r.min(last.lambda)
        } else {
            last.lambda
        };
        PerssonLevel {
            n,
            last_outer: last.outer,
            last: last.lambda,
            extrapolated,
        }
    });
    Ok(LevelSweep { rows, level, warnings })
}

/// Bottom of the essential spectrum via Dirichlet annuli. Levels are swept in
/// parallel; the result is assembled in schedule order.
pub fn persson_limit(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    schedule: &PerssonSchedule,
    opts: &SpectralOptions,
) -> Result<PerssonTrace, SpectralError> {
    schedule.validate(exhaustion.max_level())?;
    let sweeps: Vec<Result<LevelSweep, SpectralError>> = schedule
        .levels
        .par_iter()
        .map(|&n| sweep(g, field, exhaustion, n, &schedule.outer, opts))
        .collect();
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    let mut warnings = Vec::new();
    for s in sweeps {
        let s = s?;
        rows.extend(s.rows);
        levels.extend(s.level);
        warnings.extend(s.warnings);
    }
    if levels.is_empty() {
        return Err(SpectralError::InvalidSchedule("no nonempty annulus in the schedule".into()));
    }

    // λ_{n,N} ≤ λ_{n',N} for n < n' at every shared N (nested annuli)
    let mut by_outer: BTreeMap<usize, Vec<&PerssonRow>> = BTreeMap::new();
    for r in &rows {
        by_outer.entry(r.outer).or_default().push(r);
    }
    for (big, group) in &by_outer {
        for w in group.windows(2) {
            if w[0].lambda - w[1].lambda > 10.0 * opts.tol {
                return Err(SpectralError::Monotonicity(format!(
                    "λ_{{{},{big}}} = {} exceeds λ_{{{},{big}}} = {}",
                    w[0].n, w[0].lambda, w[1].n, w[1].lambda
                )));
            }
        }
    }
    for w in levels.windows(2) {
        if w[0].extrapolated - w[1].extrapolated > 10.0 * opts.tol {
            warnings.push(format!(
                "extrapolated λ_{} = {} exceeds λ_{} = {}",
                w[0].n, w[0].extrapolated, w[1].n, w[1].extrapolated
            ));
        }
    }
    let top = levels.last().expect("nonempty");
    Ok(PerssonTrace {
        estimate: top.extrapolated,
        bracket: (top.extrapolated, top.last),
        rows,
        levels,
        warnings,
    })
}
