//! Compressed sparse row storage with a reusable symbolic pattern.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Symbolic (structure-only) part of a CSR matrix. Column indices are
/// sorted and unique within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrPattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrPattern {
    /// Build a pattern from per-row column lists (deduplicated, sorted).
    pub fn from_rows(ncols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::invalid("column index out of range"));
            }
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        Ok(CsrPattern {
            nrows,
            ncols,
            row_ptr,
            col_idx,
        })
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Position in the value array of entry (r, c), if present.
    pub fn find(&self, r: usize, c: usize) -> Option<usize> {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi].binary_search(&c).ok().map(|k| lo + k)
    }
}

/// Sparse matrix in CSR form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pattern: CsrPattern,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from (row, col, value) triplets. Duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nrows];
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::invalid("triplet index out of range"));
            }
            rows[r].push(c);
        }
        let pattern = CsrPattern::from_rows(ncols, rows)?;
        let mut vals = vec![0.0; pattern.nnz()];
        for &(r, c, v) in triplets {
            let k = pattern.find(r, c).expect("entry present by construction");
            vals[k] += v;
        }
        Ok(CsrMatrix { pattern, vals })
    }

    /// Matrix with the given pattern, all values zero.
    pub fn zeros_from_pattern(pattern: CsrPattern) -> Self {
        let vals = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, vals }
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows
    }

    pub fn ncols(&self) -> usize {
        self.pattern.ncols
    }

    pub fn pattern(&self) -> &CsrPattern {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    /// Iterate the (column, value) entries of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.pattern.row_ptr[r];
        let hi = self.pattern.row_ptr[r + 1];
        self.pattern.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pattern.find(r, c).map_or(0.0, |k| self.vals[k])
    }

    /// Column indices and mutable values of one row.
    pub fn row_mut(&mut self, r: usize) -> (&[usize], &mut [f64]) {
        let lo = self.pattern.row_ptr[r];
        let hi = self.pattern.row_ptr[r + 1];
        (&self.pattern.col_idx[lo..hi], &mut self.vals[lo..hi])
    }

    /// y = A x
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.ncols(), "mul_vec dimension mismatch");
        let mut y = DVector::zeros(self.nrows());
        for r in 0..self.nrows() {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// y = A^T x
    pub fn mul_vec_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(x.len(), self.nrows(), "mul_vec_transpose dimension mismatch");
        let mut y = DVector::zeros(self.ncols());
        for r in 0..self.nrows() {
            let xr = x[r];
            if xr != 0.0 {
                for (c, v) in self.row(r) {
                    y[c] += v * xr;
                }
            }
        }
        y
    }

    /// Extract the square submatrix with rows = cols = `dofs` (sorted,
    /// global indices). `pos` must map a global index to its position in
    /// `dofs` (`usize::MAX` when absent) and have length `ncols`.
    pub fn extract_square(&self, dofs: &[usize], pos: &[usize]) -> CsrMatrix {
        let m = dofs.len();
        let mut rows: Vec<Vec<usize>> = Vec::with_capacity(m);
        let mut vals: Vec<Vec<f64>> = Vec::with_capacity(m);
        for (_, &g) in dofs.iter().enumerate() {
            let mut cols = Vec::new();
            let mut rv = Vec::new();
            for (c, v) in self.row(g) {
                let p = pos[c];
                if p != usize::MAX {
                    cols.push(p);
                    rv.push(v);
                }
            }
            rows.push(cols);
            vals.push(rv);
        }
        // columns inherit sorted order because `dofs` is sorted
        let mut row_ptr = Vec::with_capacity(m + 1);
        let mut col_idx = Vec::new();
        let mut out_vals = Vec::new();
        row_ptr.push(0);
        for (cols, rv) in rows.into_iter().zip(vals) {
            col_idx.extend_from_slice(&cols);
            out_vals.extend_from_slice(&rv);
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            pattern: CsrPattern {
                nrows: m,
                ncols: m,
                row_ptr,
                col_idx,
            },
            vals: out_vals,
        }
    }

    /// Dense copy, for tests and small reference computations.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.nrows(), self.ncols());
        for r in 0..self.nrows() {
            for (c, v) in self.row(r) {
                d[(r, c)] = v;
            }
        }
        d
    }

    /// max |A - A^T| over all entries, relative to max |A|.
    pub fn asymmetry(&self) -> f64 {
        let mut max_abs = 0.0f64;
        let mut max_diff = 0.0f64;
        for r in 0..self.nrows() {
            for (c, v) in self.row(r) {
                max_abs = max_abs.max(v.abs());
                max_diff = max_diff.max((v - self.get(c, r)).abs());
            }
        }
        if max_abs == 0.0 {
            0.0
        } else {
            max_diff / max_abs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn transpose_multiply_matches_dense() {
        let a = CsrMatrix::from_triplets(
            3,
            2,
            &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0), (2, 0, -1.0)],
        )
        .unwrap();
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let want = a.to_dense().transpose() * &x;
        assert_eq!(a.mul_vec_transpose(&x), want);
    }

    #[test]
    fn extract_square_picks_block() {
        // 4x4 tridiagonal, extract dofs {1,2}
        let mut t = Vec::new();
        for i in 0..4usize {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i < 3 {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(4, 4, &t).unwrap();
        let dofs = [1usize, 2];
        let mut pos = vec![usize::MAX; 4];
        pos[1] = 0;
        pos[2] = 1;
        let b = a.extract_square(&dofs, &pos);
        assert_eq!(b.nrows(), 2);
        assert_eq!(b.get(0, 0), 2.0);
        assert_eq!(b.get(0, 1), -1.0);
        assert_eq!(b.get(1, 0), -1.0);
        assert_eq!(b.get(1, 1), 2.0);
    }

    #[test]
    fn triplet_out_of_range_rejected() {
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }
}
