//! Coefficient fields `p`, `q`, `w` on the edges of a metric graph.

pub mod expr;
mod field;
mod hypotheses;
pub mod quadrature;

pub use expr::{Expr, ExprError};
pub use field::{Coefficient, CoefficientField, CoefficientSpec, Integrand, Sample};
pub use hypotheses::{validate_hypotheses, Clause, HypothesisReport, IntegrabilityExponent};
pub use quadrature::QuadratureConfig;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoeffError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid coefficient spec: {0}")]
    Spec(String),
    #[error("coefficient document: {0}")]
    Document(String),
    #[error("integration range [{a}, {b}] outside edge `{edge}` of length {length}")]
    Range {
        edge: String,
        a: f64,
        b: f64,
        length: f64,
    },
    #[error("integrability violation on edge `{edge}`: non-finite integrand at x = {x}")]
    Integrability { edge: String, x: f64 },
    #[error("coefficient {coefficient} must be positive, found {value} on edge `{edge}` at x = {x}")]
    NotPositive {
        edge: String,
        coefficient: &'static str,
        x: f64,
        value: f64,
    },
}
