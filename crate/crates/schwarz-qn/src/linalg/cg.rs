//! Jacobi-preconditioned conjugate gradients, the configurable
//! alternative to the banded direct solver.

use super::csr::CsrMatrix;
use crate::error::{Error, Result};
use nalgebra::DVector;

/// Solve `A x = b` for SPD `A` to a relative residual tolerance.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &DVector<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::invalid("cg needs a square matrix"));
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut inv_diag = DVector::zeros(n);
    for i in 0..n {
        let d = a.get(i, i);
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::LinearSolve(format!(
                "jacobi scaling needs positive diagonal, got {d:e} at {i}"
            )));
        }
        inv_diag[i] = 1.0 / d;
    }

    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(DVector::zeros(n));
    }
    let tol = rel_tol * bnorm;

    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = r.component_mul(&inv_diag);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for _ in 0..max_iter {
        if r.norm() <= tol {
            return Ok(x);
        }
        let ap = a.mul_vec(&p);
        let pap = p.dot(&ap);
        if !(pap.is_finite() && pap > 0.0) {
            return Err(Error::LinearSolve(format!(
                "cg breakdown: p^T A p = {pap:e}"
            )));
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        z = r.component_mul(&inv_diag);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + beta * p;
    }
    if r.norm() <= tol {
        Ok(x)
    } else {
        Err(Error::LinearSolve(format!(
            "cg did not reach tolerance in {max_iter} iterations (residual {:e})",
            r.norm()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50usize;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + (i as f64) * 0.01));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let x_true = DVector::from_fn(n, |i, _| (i as f64 / 7.0).cos());
        let b = a.mul_vec(&x_true);
        let x = conjugate_gradient(&a, &b, 1e-13, 10 * n).unwrap();
        assert!((&x - &x_true).norm() <= 1e-9 * x_true.norm());
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let x = conjugate_gradient(&a, &DVector::zeros(2), 1e-12, 10).unwrap();
        assert_eq!(x, DVector::zeros(2));
    }
}
