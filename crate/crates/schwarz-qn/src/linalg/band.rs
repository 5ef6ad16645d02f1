//! Banded LDL^T factorization.
//!
//! The Q1 stencil on a lexicographically ordered structured grid gives a
//! bandwidth of (row width + 2), so a band factorization is the natural
//! direct solver here: O(n b^2) work, no fill outside the band, fully
//! deterministic.

use super::csr::CsrMatrix;
use crate::error::{Error, Result};
use nalgebra::DVector;

/// LDL^T factors of a symmetric positive definite banded matrix.
///
/// Storage is row-major lower band: `band[i * (bw + 1) + k]` holds entry
/// `(i, i - bw + k)`, with the diagonal at `k = bw`.
pub struct BandLdl {
    n: usize,
    bw: usize,
    band: Vec<f64>,
    diag: Vec<f64>,
}

impl BandLdl {
    /// Factor a symmetric matrix given in CSR form. Only the lower
    /// triangle is read. Fails if a pivot is not strictly positive, which
    /// signals an indefinite (or numerically singular) matrix.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::invalid("band factorization needs a square matrix"));
        }
        let mut bw = 0usize;
        for r in 0..n {
            for (c, _) in a.row(r) {
                bw = bw.max(r.abs_diff(c));
            }
        }
        let stride = bw + 1;
        let mut band = vec![0.0; n * stride];
        for r in 0..n {
            for (c, v) in a.row(r) {
                if c <= r {
                    band[r * stride + (bw - (r - c))] = v;
                }
            }
        }

        let mut diag = vec![0.0; n];
        // in-place banded LDL^T; band ends up holding L (unit diagonal implied)
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            for j in jmin..i {
                let kmin = jmin.max(j.saturating_sub(bw));
                let mut sum = band[i * stride + (bw - (i - j))];
                for k in kmin..j {
                    sum -= band[i * stride + (bw - (i - k))]
                        * band[j * stride + (bw - (j - k))]
                        * diag[k];
                }
                band[i * stride + (bw - (i - j))] = sum / diag[j];
            }
            let mut d = band[i * stride + bw];
            for k in jmin..i {
                let l = band[i * stride + (bw - (i - k))];
                d -= l * l * diag[k];
            }
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::LinearSolve(format!(
                    "nonpositive pivot {d:e} at row {i}"
                )));
            }
            diag[i] = d;
        }
        Ok(BandLdl { n, bw, band, diag })
    }

    /// Solve `A x = b` using the factors.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        assert_eq!(b.len(), self.n, "band solve dimension mismatch");
        let stride = self.bw + 1;
        let mut x = b.clone();
        // forward: L z = b
        for i in 0..self.n {
            let jmin = i.saturating_sub(self.bw);
            let mut sum = x[i];
            for j in jmin..i {
                sum -= self.band[i * stride + (self.bw - (i - j))] * x[j];
            }
            x[i] = sum;
        }
        // diagonal
        for i in 0..self.n {
            x[i] /= self.diag[i];
        }
        // backward: L^T x = z
        for i in (0..self.n).rev() {
            let jmax = (i + self.bw).min(self.n - 1);
            let mut sum = x[i];
            for j in (i + 1)..=jmax {
                sum -= self.band[j * stride + (self.bw - (j - i))] * x[j];
            }
            x[i] = sum;
        }
        x
    }
}
