//! Bottom of the spectrum and of the essential spectrum.
//!
//! * [`inf_spectrum`]: `λ₁` of the Dirichlet problems on `Γ_n` for growing `n`.
//! * [`ap_check`] / [`positive_solution`]: positive solutions of `ly = λy`
//!   below the Dirichlet bottom, or a refutation above it.
//! * [`persson_limit`]: `λ₁` of the annuli `Γ_N \ Γ_n`, pushed outward.
//! * [`cutoff_build`], [`sobolev_constant`], [`ground_state_transform_check`],
//!   [`harnack_probe`]: the auxiliary objects behind those procedures.

mod cutoff;
mod persson;
mod positive;
mod sobolev;

pub use cutoff::{cutoff_build, CutoffEdge, CutoffFunction, CutoffShape};
pub use persson::{annulus_forms, persson_limit, PerssonLevel, PerssonRow, PerssonSchedule, PerssonTrace};
pub use positive::{
    ap_check, ground_state_transform_check, harnack_probe, positive_solution, ApOutcome, HarnackBounds,
    PositiveSolutionCert,
};
pub use sobolev::{sobolev_constant, sobolev_gap, SobolevEstimate};

pub use crate::fem::BoundaryCondition;

use std::sync::Arc;

use thiserror::Error;

use crate::coeff::{CoeffError, CoefficientField};
use crate::eig::{smallest_eigenpair, EigenError, EigenOptions, EigenResult, Pencil};
use crate::fem::{assemble, subgraph, AssembledForms, DomainTag, FemError, GraphMesh};
use crate::graph::{Exhaustion, GraphError, MetricGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("level {0} is beyond the exhaustion (max level {1})")]
    LevelOutOfRange(usize, usize),
    #[error("level {0} contains no edges")]
    EmptyLevel(usize),
    #[error("annulus Γ_{outer} \\ Γ_{inner} contains no edges")]
    EmptyAnnulus { inner: usize, outer: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("monotonicity violated: {0}")]
    Monotonicity(String),
    #[error("λ = {lambda} is not safely below the Dirichlet bottom λ₁ = {lambda1} (tolerance {tol})")]
    LambdaTooClose { lambda: f64, lambda1: f64, tol: f64 },
    #[error("positive solution has nonpositive value {value} at {location}")]
    NegativeNode { location: String, value: f64 },
    #[error("no Dirichlet data to lift: the level has no constrained vertices")]
    NoBoundaryData,
    #[error("the root is not part of level {0}")]
    RootNotInLevel(usize),
    #[error("trial function must vanish on constrained nodes, found {0}")]
    TrialNotVanishing(f64),
    #[error("trial vector has {found} entries, mesh has {expected} nodes")]
    TrialLength { expected: usize, found: usize },
    #[error("certificates are inconsistent: {0}")]
    MismatchedCertificates(String),
    #[error("halo of level {0} covers the host graph; no edge where the cutoff equals 1")]
    CutoffCoversHost(usize),
    #[error("halo edge `{0}` has zero ∫ sqrt(w/p)")]
    DegenerateHaloEdge(String),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("no admissible window length for ε = {epsilon}: ∫ 1/p over windows of length {smallest} already reaches {value}")]
    NoAdmissibleDelta { epsilon: f64, smallest: f64, value: f64 },
}

/// Shared numerical settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOptions {
    /// Target cell size.
    pub h: f64,
    /// Decision tolerance: width of the indeterminate band around `λ₁`,
    /// stopping threshold for outward sweeps, and (times 10) the allowed
    /// monotonicity slack.
    pub tol: f64,
    pub bc: BoundaryCondition,
    pub eig: EigenOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            h: 0.01,
            tol: 1e-6,
            bc: BoundaryCondition::Dirichlet,
            eig: EigenOptions::default(),
        }
    }
}

/// One row of an [`inf_spectrum`] sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRow {
    pub n: usize,
    pub lambda: f64,
    pub residual: f64,
    pub dofs: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub rows: Vec<LevelRow>,
    /// `λ₁` of the largest level.
    pub estimate: f64,
    /// Last decrement `λ(n_{k-1}) - λ(n_k)`; `None` for a single level.
    pub error_proxy: Option<f64>,
    pub warnings: Vec<String>,
}

pub(crate) fn check_level(exhaustion: &Exhaustion, n: usize) -> Result<(), SpectralError> {
    if n > exhaustion.max_level() {
        return Err(SpectralError::LevelOutOfRange(n, exhaustion.max_level()));
    }
    Ok(())
}

/// Forms of the Dirichlet problem on `Γ_n`: constrained on the relative
/// boundary of `Γ_n` inside the host and, under
/// [`BoundaryCondition::Dirichlet`], on `∂Γ`.
pub fn level_forms(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
    opts: &SpectralOptions,
) -> Result<AssembledForms, SpectralError> {
    check_level(exhaustion, n)?;
    let edges = exhaustion.level(n);
    if edges.is_empty() {
        return Err(SpectralError::EmptyLevel(n));
    }
    let (pieces, spec) = subgraph(g, edges, opts.bc);
    let domain = if exhaustion.covers_host(g, n) {
        DomainTag::WholeGraph
    } else {
        DomainTag::Subgraph
    };
    let mesh = GraphMesh::build(g, &pieces, opts.h, &spec, domain)?;
    Ok(assemble(Arc::new(mesh), field)?)
}

pub(crate) fn solve(forms: &AssembledForms, opts: &EigenOptions) -> Result<EigenResult, SpectralError> {
    Ok(smallest_eigenpair(&Pencil::from_forms(forms), opts)?)
}

/// Smallest eigenpair of the Dirichlet problem on `Γ_n`.
pub fn level_bottom(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    n: usize,
    opts: &SpectralOptions,
) -> Result<EigenResult, SpectralError> {
    solve(&level_forms(g, field, exhaustion, n, opts)?, &opts.eig)
}

/// `λ₁(Γ_n)` for each listed level.
pub fn inf_spectrum(
    g: &MetricGraph,
    field: &CoefficientField,
    exhaustion: &Exhaustion,
    levels: &[usize],
    opts: &SpectralOptions,
) -> Result<SpectralReport, SpectralError> {
    if levels.is_empty() {
        return Err(SpectralError::InvalidSchedule("no levels given".into()));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SpectralError::InvalidSchedule(format!(
            "levels must be strictly increasing, got {levels:?}"
        )));
    }
    let mut rows = Vec::with_capacity(levels.len());
    let mut warnings = Vec::new();
    for &n in levels {
        let forms = level_forms(g, field, exhaustion, n, opts)?;
        let r = solve(&forms, &opts.eig)?;
        rows.push(LevelRow {
            n,
            lambda: r.lambda,
            residual: r.residual,
            dofs: forms.free_count(),
            iterations: r.iterations,
        });
    }
    for w in rows.windows(2) {
        let rise = w[1].lambda - w[0].lambda;
        if rise > 10.0 * opts.tol {
            return Err(SpectralError::Monotonicity(format!(
                "λ₁(Γ_{}) = {} exceeds λ₁(Γ_{}) = {} by {rise:.3e}",
                w[1].n, w[1].lambda, w[0].n, w[0].lambda
            )));
        }
    }
    if let Some(last) = levels.last() {
        if !exhaustion.covers_host(g, *last) {
            warnings.push(format!(
                "Γ_{last} does not cover the host graph; the estimate is an upper bound"
            ));
        }
    }
    let estimate = rows.last().map(|r| r.lambda).unwrap_or(f64::NAN);
    let error_proxy = (rows.len() >= 2).then(|| {
        let k = rows.len();
        rows[k - 2].lambda - rows[k - 1].lambda
    });
    Ok(SpectralReport {
        rows,
        estimate,
        error_proxy,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families;
    use std::f64::consts::PI;

    #[test]
    fn interval_bottom() {
        let g = families::path(1, 1.0);
        let field = CoefficientField::free(&g);
        let ex = Exhaustion::build(&g, 0, 1).unwrap();
        let opts = SpectralOptions {
            h: 1.0 / 200.0,
            ..Default::default()
        };
        let r = inf_spectrum(&g, &field, &ex, &[1], &opts).unwrap();
        assert!((r.estimate - PI * PI).abs() < 1e-3);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn nested_levels_decrease() {
        let g = families::path(6, 1.0);
        let field = CoefficientField::free(&g);
        let ex = Exhaustion::build(&g, 0, 6).unwrap();
        let opts = SpectralOptions {
            h: 0.05,
            ..Default::default()
        };
        let r = inf_spectrum(&g, &field, &ex, &[1, 2, 4], &opts).unwrap();
        assert!(r.rows.windows(2).all(|w| w[1].lambda <= w[0].lambda));
        assert!((r.rows[2].lambda - (PI / 4.0).powi(2)).abs() < 1e-3);
        assert!(r.error_proxy.unwrap() > 0.0);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn schedule_errors() {
        let g = families::path(3, 1.0);
        let field = CoefficientField::free(&g);
        let ex = Exhaustion::build(&g, 0, 3).unwrap();
        let opts = SpectralOptions::default();
        assert!(matches!(
            inf_spectrum(&g, &field, &ex, &[2, 1], &opts),
            Err(SpectralError::InvalidSchedule(_))
        ));
        assert!(matches!(
            inf_spectrum(&g, &field, &ex, &[0], &opts),
            Err(SpectralError::EmptyLevel(0))
        ));
        assert!(matches!(
            inf_spectrum(&g, &field, &ex, &[7], &opts),
            Err(SpectralError::LevelOutOfRange(7, 3))
        ));
    }
}
