//! `P A Pᵀ = L D Lᵀ` for symmetric positive definite `A`.
//!
//! The ordering is a plain minimum-degree elimination on the explicit graph
//! (ties broken by index). Mesh graphs of metric graphs are trees of paths
//! joined at vertices, for which this produces little or no fill. The
//! elimination also yields the exact column structure of `L`, so the numeric
//! phase is a left-looking sweep over a fixed pattern.

use std::collections::BTreeSet;

use thiserror::Error;

use super::CsrMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("matrix is not square ({0} x {1})")]
    NotSquare(usize, usize),
    #[error("nonpositive pivot {value} at elimination step {step}; matrix is not positive definite")]
    NonPositivePivot { step: usize, value: f64 },
}

#[derive(Debug, Clone)]
pub struct Ldl {
    n: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    l_vals: Vec<f64>,
    d: Vec<f64>,
}

fn minimum_degree(a: &CsrMatrix) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = a.nrows();
    let mut adj: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut structure = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        eliminated[v] = true;
        order.push(v);
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (k, &u) in nbrs.iter().enumerate() {
            for &t in &nbrs[k + 1..] {
                adj[u].insert(t);
                adj[t].insert(u);
            }
        }
        for &u in &nbrs {
            queue.insert((adj[u].len(), u));
        }
        debug_assert!(nbrs.iter().all(|&u| !eliminated[u]));
        structure.push(nbrs);
        adj[v].clear();
    }
    (order, structure)
}

impl Ldl {
    pub fn factor(a: &CsrMatrix) -> Result<Self, FactorError> {
        if a.nrows() != a.ncols() {
            return Err(FactorError::NotSquare(a.nrows(), a.ncols()));
        }
        let n = a.nrows();
        let (perm, structure) = minimum_degree(a);
        let mut inv_perm = vec![0; n];
        for (k, &v) in perm.iter().enumerate() {
            inv_perm[v] = k;
        }

        // column pattern of L in the permuted numbering
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::new();
        for (k, nbrs) in structure.iter().enumerate() {
            let mut rows: Vec<usize> = nbrs.iter().map(|&u| inv_perm[u]).collect();
            rows.sort_unstable();
            row_idx.extend(rows);
            col_ptr[k + 1] = row_idx.len();
        }
        // for every row k, the earlier columns j with L[k, j] != 0
        let mut row_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for j in 0..n {
            for &i in &row_idx[col_ptr[j]..col_ptr[j + 1]] {
                row_cols[i].push(j);
            }
        }

        let mut l_vals = vec![0.0; row_idx.len()];
        let mut d = vec![0.0; n];
        let mut work = vec![0.0; n];
        for k in 0..n {
            for (u, v) in a.row(perm[k]) {
                let i = inv_perm[u];
                if i >= k {
                    work[i] += v;
                }
            }
            for &j in &row_cols[k] {
                let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
                let rows = &row_idx[lo..hi];
                let start = rows.partition_point(|&r| r < k);
                let l_kj = l_vals[lo + start];
                let scale = l_kj * d[j];
                for t in lo + start..hi {
                    work[row_idx[t]] -= l_vals[t] * scale;
                }
            }
            let pivot = work[k];
            work[k] = 0.0;
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(FactorError::NonPositivePivot {
                    step: k,
                    value: pivot,
                });
            }
            d[k] = pivot;
            for t in col_ptr[k]..col_ptr[k + 1] {
                let i = row_idx[t];
                l_vals[t] = work[i] / pivot;
                work[i] = 0.0;
            }
        }
        Ok(Ldl {
            n,
            perm,
            inv_perm,
            col_ptr,
            row_idx,
            l_vals,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entries of `L` below the diagonal.
    pub fn fill(&self) -> usize {
        self.l_vals.len()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], out: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut z: Vec<f64> = self.perm.iter().map(|&v| b[v]).collect();
        for j in 0..self.n {
            let zj = z[j];
            if zj != 0.0 {
                for t in self.col_ptr[j]..self.col_ptr[j + 1] {
                    z[self.row_idx[t]] -= self.l_vals[t] * zj;
                }
            }
        }
        for (zj, dj) in z.iter_mut().zip(&self.d) {
            *zj /= dj;
        }
        for j in (0..self.n).rev() {
            let mut s = z[j];
            for t in self.col_ptr[j]..self.col_ptr[j + 1] {
                s -= self.l_vals[t] * z[self.row_idx[t]];
            }
            z[j] = s;
        }
        for (v, o) in out.iter_mut().enumerate() {
            *o = z[self.inv_perm[v]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{norm2, TripletBuilder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_path(n: usize, shift: f64) -> CsrMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0 + shift);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn path_has_no_fill() {
        let a = laplacian_path(50, 0.0);
        let f = Ldl::factor(&a).unwrap();
        assert_eq!(f.fill(), 49);
    }

    #[test]
    fn solves_random_spd_to_high_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        // random sparse SPD: random graph Laplacian plus identity
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 1.0);
        }
        for _ in 0..150 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let w: f64 = rng.gen_range(0.1..2.0);
            b.push(i, i, w);
            b.push(j, j, w);
            b.push(i, j, -w);
            b.push(j, i, -w);
        }
        let a = b.build();
        let f = Ldl::factor(&a).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = f.solve(&rhs);
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(&rhs).map(|(u, v)| u - v).collect();
        assert!(norm2(&r) <= 1e-12 * norm2(&rhs));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = laplacian_path(10, -1.0);
        assert!(matches!(
            Ldl::factor(&a),
            Err(FactorError::NonPositivePivot { .. })
        ));
    }
}
