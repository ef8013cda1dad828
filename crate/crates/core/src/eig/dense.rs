//! Dense reference solver: Cholesky `M = LLᵀ`, then the symmetric eigenproblem
//! of `L⁻¹ K L⁻ᵀ`. Cubic cost; meant for small pencils and tests.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use super::{EigenError, Pencil};
use crate::sparse::{CsrMatrix, FactorError};

fn to_dense(a: &CsrMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] = v;
    }
    d
}

/// All generalized eigenvalues in ascending order, with `M`-orthonormal
/// eigenvectors as columns.
pub fn eigen_decomposition(pencil: &Pencil) -> Result<(Vec<f64>, DMatrix<f64>), EigenError> {
    let n = pencil.dim();
    if n == 0 {
        return Err(EigenError::Empty);
    }
    if pencil.m.nrows() != n {
        return Err(EigenError::DimensionMismatch { k: n, m: pencil.m.nrows() });
    }
    let chol = Cholesky::new(to_dense(&pencil.m)).ok_or(EigenError::MassNotPositive(
        FactorError::NonPositivePivot { step: 0, value: f64::NAN },
    ))?;
    let l = chol.l();
    let k = to_dense(&pencil.k);
    let linv_k = l.solve_lower_triangular(&k).expect("Cholesky factor is invertible");
    let c = l
        .solve_lower_triangular(&linv_k.transpose())
        .expect("Cholesky factor is invertible");
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let z = lt
            .solve_upper_triangular(&eig.eigenvectors.column(i).into_owned())
            .expect("Cholesky factor is invertible");
        vectors.set_column(col, &z);
    }
    Ok((values, vectors))
}

/// Smallest generalized eigenvalue and its `M`-normalized eigenvector.
pub fn smallest(pencil: &Pencil) -> Result<(f64, Vec<f64>), EigenError> {
    let (values, vectors) = eigen_decomposition(pencil)?;
    let mut v: Vec<f64> = vectors.column(0).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((values[0], v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let k = CsrMatrix::from_dense(&[vec![2.0, 0.0], vec![0.0, 9.0]]);
        let m = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 4.0]]);
        let (vals, _) = eigen_decomposition(&Pencil::new(k, m)).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14);
        assert!((vals[1] - 2.25).abs() < 1e-14);
    }
}
