use nalgebra::{DMatrix, SymmetricEigen};

use super::{EigenOptions, EigenResult, HistoryRow, Pencil};
use crate::sparse::{dot, Ldl};

struct Ritz {
    theta: f64,
    vector: Vec<f64>,
}

/// One Lanczos cycle of `(K - σM)⁻¹M` from `start`, with full
/// `M`-orthogonal reorthogonalization (two passes).
fn cycle(pencil: &Pencil, factor: &Ldl, start: &[f64], steps: usize) -> Ritz {
    let n = start.len();
    let mut v = start.to_vec();
    let mut mv = pencil.m.mul_vec(&v);
    let s = dot(&v, &mv).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    mv.iter_mut().for_each(|x| *x /= s);
    let mut basis = vec![v];
    let mut mbasis = vec![mv];
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut w = vec![0.0; n];
    for j in 0..steps {
        factor.solve_into(&mbasis[j], &mut w);
        let mut a = 0.0;
        for _ in 0..2 {
            let coeffs: Vec<f64> = mbasis.iter().map(|mb| dot(&w, mb)).collect();
            a += coeffs[j];
            for (c, b) in coeffs.iter().zip(&basis) {
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        alpha.push(a);
        if j + 1 == steps {
            break;
        }
        let mw = pencil.m.mul_vec(&w);
        let b = dot(&w, &mw).max(0.0).sqrt();
        let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(b > 1e-12 * scale) {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
        mbasis.push(mw.iter().map(|x| x / b).collect());
    }
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (top, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    let coeffs = eig.eigenvectors.column(top);
    let mut vector = vec![0.0; n];
    for (c, b) in coeffs.iter().zip(&basis) {
        vector.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
    }
    Ritz { theta, vector }
}

pub(super) fn solve(pencil: &Pencil, factor: &Ldl, shift: f64, opts: &EigenOptions) -> EigenResult {
    let n = pencil.dim();
    let steps = opts.krylov_dim.clamp(1, n);
    let mut x = vec![1.0; n];
    let mut history = Vec::new();
    let mut best: Option<EigenResult> = None;
    for iteration in 1..=opts.max_iter.max(1) {
        let ritz = cycle(pencil, factor, &x, steps);
        let mut y = ritz.vector;
        let norm = dot(&y, &pencil.m.mul_vec(&y)).sqrt();
        let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        y.iter_mut().for_each(|v| *v *= sign / norm);
        let lambda = if ritz.theta > 0.0 {
            pencil.rayleigh_quotient(&y)
        } else {
            f64::NAN
        };
        let residual = pencil.residual(lambda, &y);
        history.push(HistoryRow {
            iteration,
            lambda,
            residual,
        });
        let converged = residual <= opts.tol;
        let candidate = EigenResult {
            lambda,
            vector: y.clone(),
            residual,
            iterations: iteration,
            converged,
            shift,
            history: Vec::new(),
        };
        if best.as_ref().is_none_or(|b| !(b.residual <= residual)) {
            best = Some(candidate);
        }
        if converged {
            break;
        }
        x = y;
    }
    let mut out = best.expect("at least one cycle");
    out.iterations = history.len();
    out.history = history;
    out
}
