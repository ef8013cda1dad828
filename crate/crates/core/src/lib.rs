//! Spectral bottoms of Sturm–Liouville operators `(1/w)(-(p f')' + q f)` on
//! metric graphs with Kirchhoff vertex conditions.
//!
//! The crate discretizes the quadratic form `∫ p|f'|² + q|f|²` against the
//! weight `∫ w|f|²` with continuous piecewise-linear elements (Kirchhoff
//! conditions are the natural vertex conditions of that form) and provides:
//!
//! | Item | Purpose |
//! |------|---------|
//! | [`graph`] | metric graphs, path metric, exhaustions `Γ_n` and haloes |
//! | [`coeff`] | coefficient fields, expression parser, hypothesis report |
//! | [`fem`] | meshes, DOF maps, assembly of stiffness/potential/mass pencils |
//! | [`eig`] | smallest eigenpair of a sparse symmetric pencil |
//! | [`spectral`] | bottom of the spectrum, positive-solution certificates, bottom of the essential spectrum via exhaustion, cutoffs, Sobolev constants |
//! | [`verify`] | runtime property suite |

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeff;
pub mod eig;
pub mod fem;
pub mod graph;
pub mod sparse;
pub mod spectral;
pub mod verify;

pub use coeff::{
    validate_hypotheses, CoeffError, Coefficient, CoefficientField, CoefficientSpec, Expr,
    HypothesisReport, Integrand, IntegrabilityExponent,
};
pub use eig::{smallest_eigenpair, EigenError, EigenOptions, EigenResult, Pencil};
pub use fem::{assemble, AssembledForms, DirichletTruncationSpec, FemError, GraphMesh};
pub use graph::{Exhaustion, GraphError, MetricGraph, Point};
pub use spectral::{
    ApOutcome, BoundaryCondition, CutoffFunction, PerssonTrace, PositiveSolutionCert,
    SobolevEstimate, SpectralError, SpectralOptions, SpectralReport,
};

use thiserror::Error;

/// Any error surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}
