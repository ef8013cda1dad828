//! Smallest eigenpair of a symmetric pencil `K x = λ M x` with `M` positive
//! definite.
//!
//! The iterative path is shift-and-invert Lanczos in the `M` inner product:
//! `(K - σM)⁻¹M` is self-adjoint there and its largest eigenvalue `θ` maps to
//! `λ = σ + 1/θ`. A successful LDLᵀ factorization with positive pivots
//! certifies that `σ` lies below the spectrum; failures trigger a reshift.

pub mod dense;
mod lanczos;

use thiserror::Error;

use crate::fem::AssembledForms;
use crate::sparse::{dot, norm2, CsrMatrix, FactorError, Ldl};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("pencil has no degrees of freedom")]
    Empty,
    #[error("pencil dimensions differ: K is {k}x{k}, M is {m}x{m}")]
    DimensionMismatch { k: usize, m: usize },
    #[error("mass matrix is not positive definite: {0}")]
    MassNotPositive(FactorError),
    #[error("shift {shift} is not below the spectrum after {attempts} attempts: {source}")]
    Factorization {
        shift: f64,
        attempts: usize,
        source: FactorError,
    },
    #[error(
        "no convergence after {} restarts: best λ = {}, residual {:.3e}",
        best.iterations, best.lambda, best.residual
    )]
    NotConverged { best: Box<EigenResult> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
}

impl Pencil {
    pub fn new(k: CsrMatrix, m: CsrMatrix) -> Self {
        Pencil { k, m }
    }

    /// `(K_p + K_q, M)` on the free nodes.
    pub fn from_forms(forms: &AssembledForms) -> Self {
        Pencil {
            k: forms.stiffness(),
            m: forms.m.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.k.nrows()
    }

    /// `‖K x - λ M x‖₂ / ‖M x‖₂`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        let kx = self.k.mul_vec(x);
        let mx = self.m.mul_vec(x);
        let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
        norm2(&r) / norm2(&mx)
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        dot(x, &self.k.mul_vec(x)) / dot(x, &self.m.mul_vec(x))
    }

    fn check(&self) -> Result<(), EigenError> {
        if self.k.nrows() != self.m.nrows() || self.k.ncols() != self.m.ncols() || self.k.nrows() != self.k.ncols() {
            return Err(EigenError::DimensionMismatch {
                k: self.k.nrows(),
                m: self.m.nrows(),
            });
        }
        if self.dim() == 0 {
            return Err(EigenError::Empty);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Shift `σ`; chosen below [`eigen_lower_bound`] when `None`.
    pub shift: Option<f64>,
    pub tol: f64,
    /// Maximum number of Lanczos restarts.
    pub max_iter: usize,
    pub krylov_dim: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            shift: None,
            tol: 1e-9,
            max_iter: 50,
            krylov_dim: 30,
        }
    }
}

/// One restart of the iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iteration: usize,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda: f64,
    /// `M`-normalized, oriented so that its entries sum to a nonnegative value.
    pub vector: Vec<f64>,
    /// `‖K x - λ M x‖ / ‖M x‖`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub shift: f64,
    pub history: Vec<HistoryRow>,
}

/// Largest `λ` for which `K - λM` is weakly diagonally dominant with a
/// nonnegative diagonal, hence positive semidefinite. Falls back to stepping
/// down until `K - λM` factors when no such `λ` exists.
pub fn eigen_lower_bound(pencil: &Pencil) -> f64 {
    let n = pencil.dim();
    if n == 0 {
        return 0.0;
    }
    let (k, m) = (&pencil.k, &pencil.m);
    let margin = |lambda: f64| -> f64 {
        (0..n)
            .map(|i| {
                let mut diag = 0.0;
                let mut off = 0.0;
                let mut kr = k.row(i).peekable();
                let mut mr = m.row(i).peekable();
                loop {
                    let (j, v) = match (kr.peek().copied(), mr.peek().copied()) {
                        (Some((a, u)), Some((b, w))) if a == b => {
                            kr.next();
                            mr.next();
                            (a, u - lambda * w)
                        }
                        (Some((a, u)), Some((b, _))) if a < b => {
                            kr.next();
                            (a, u)
                        }
                        (Some(_), Some((b, w))) | (None, Some((b, w))) => {
                            mr.next();
                            (b, -lambda * w)
                        }
                        (Some((a, u)), None) => {
                            kr.next();
                            (a, u)
                        }
                        (None, None) => break,
                    };
                    if j == i {
                        diag = v;
                    } else {
                        off += v.abs();
                    }
                }
                diag - off
            })
            .fold(f64::INFINITY, f64::min)
    };
    let kd = k.diagonal();
    let md = m.diagonal();
    let mut hi = kd
        .iter()
        .zip(&md)
        .map(|(a, b)| a / b)
        .fold(f64::INFINITY, f64::min);
    if !hi.is_finite() {
        hi = 0.0;
    }
    if margin(hi) >= 0.0 {
        return hi;
    }
    let mut step = 1.0 + hi.abs();
    let mut lo = None;
    for _ in 0..64 {
        let trial = hi - step;
        if margin(trial) >= 0.0 {
            lo = Some(trial);
            break;
        }
        step *= 2.0;
    }
    match lo {
        Some(mut lo) => {
            let mut hi = hi;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if margin(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
        None => {
            let mut step = 1.0 + hi.abs();
            let mut trial = hi - step;
            for _ in 0..64 {
                if Ldl::factor(&k.linear_combination(1.0, m, -trial)).is_ok() {
                    return trial;
                }
                step *= 2.0;
                trial = hi - step;
            }
            trial
        }
    }
}

/// Number of reshifts attempted after a failed factorization.
const MAX_RESHIFTS: usize = 3;

pub fn smallest_eigenpair(pencil: &Pencil, opts: &EigenOptions) -> Result<EigenResult, EigenError> {
    pencil.check()?;
    Ldl::factor(&pencil.m).map_err(EigenError::MassNotPositive)?;
    let mut shift = match opts.shift {
        Some(s) => s,
        None => {
            let lb = eigen_lower_bound(pencil);
            lb - 0.01 * (1.0 + lb.abs())
        }
    };
    let mut attempt = 0;
    let factor = loop {
        match Ldl::factor(&pencil.k.linear_combination(1.0, &pencil.m, -shift)) {
            Ok(f) => break f,
            Err(source) => {
                attempt += 1;
                if attempt > MAX_RESHIFTS {
                    return Err(EigenError::Factorization {
                        shift,
                        attempts: attempt,
                        source,
                    });
                }
                shift -= (1.0 + shift.abs()) * 10f64.powi(attempt as i32 - 1);
            }
        }
    };
    let result = lanczos::solve(pencil, &factor, shift, opts);
    if result.converged {
        Ok(result)
    } else {
        Err(EigenError::NotConverged {
            best: Box::new(result),
        })
    }
}
