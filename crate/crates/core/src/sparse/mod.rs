//! Compressed sparse row storage, a symmetric LDLᵀ factorization with a
//! minimum-degree ordering, and Matrix Market output.

mod ldl;
mod market;

pub use ldl::{FactorError, Ldl};
pub use market::write_matrix_market;

/// Accumulates `(row, col, value)` contributions. Duplicates are summed in
/// insertion order when converted, so two builders fed the same sequence
/// produce bitwise identical matrices.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable sort keeps insertion order among duplicates
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            cols,
            vals,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 1.0);
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut b = TripletBuilder::new(n, m);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `a·self + b·other` on the union pattern.
    pub fn linear_combination(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut builder = TripletBuilder::new(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let mut left = self.row(i).peekable();
            let mut right = other.row(i).peekable();
            loop {
                match (left.peek().copied(), right.peek().copied()) {
                    (Some((j, u)), Some((k, v))) if j == k => {
                        builder.push(i, j, a * u + b * v);
                        left.next();
                        right.next();
                    }
                    (Some((j, u)), Some((k, _))) if j < k => {
                        builder.push(i, j, a * u);
                        left.next();
                    }
                    (Some(_), Some((k, v))) => {
                        builder.push(i, k, b * v);
                        right.next();
                    }
                    (Some((j, u)), None) => {
                        builder.push(i, j, a * u);
                        left.next();
                    }
                    (None, Some((k, v))) => {
                        builder.push(i, k, b * v);
                        right.next();
                    }
                    (None, None) => break,
                }
            }
        }
        builder.build()
    }

    pub fn scaled(&self, c: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.ncols, self.nrows);
        for (i, j, v) in self.triplets() {
            b.push(j, i, v);
        }
        b.build()
    }

    /// `max |A - Aᵀ|`; zero for exactly symmetric storage.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    /// Rows and columns `keep` (ascending, no duplicates).
    pub fn submatrix(&self, keep_rows: &[usize], keep_cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &j) in keep_cols.iter().enumerate() {
            col_map[j] = k;
        }
        let mut b = TripletBuilder::new(keep_rows.len(), keep_cols.len());
        for (r, &i) in keep_rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if col_map[j] != usize::MAX {
                    b.push(r, col_map[j], v);
                }
            }
        }
        b.build()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_sum_and_symmetry_is_exact() {
        let mut b = TripletBuilder::new(2, 2);
        for v in [0.1, 0.2, 0.3] {
            b.push(0, 1, v);
            b.push(1, 0, v);
        }
        b.push(0, 0, 1.0);
        let m = b.build();
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert_eq!(m.asymmetry(), 0.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn combination_and_products() {
        let a = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let i = CsrMatrix::identity(2);
        let c = a.linear_combination(1.0, &i, -3.0);
        assert_eq!(c.to_dense(), vec![vec![-1.0, -1.0], vec![-1.0, -1.0]]);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![1.0, 1.0]);
        assert_eq!(a.transpose(), a);
        assert_eq!(a.norm_inf(), 3.0);
        let s = a.submatrix(&[1], &[0, 1]);
        assert_eq!(s.to_dense(), vec![vec![-1.0, 2.0]]);
    }
}
