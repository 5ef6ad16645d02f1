//! Limited-memory multisecant engines.
//!
//! A [`SecantHistory`] keeps the m most recent (s, y) pairs. Two inverse
//! actions are provided:
//!
//! * L-BFGS via the two-loop recursion, with B0 = gamma^-1 I and the
//!   standard curvature admission rule on pushed pairs;
//! * type-I Anderson acceleration, B = I + (Y - S)(S^T S)^-1 S^T,
//!   inverted through the Sherman-Morrison-Woodbury identity with a
//!   Tikhonov-regularized inner system.
//!
//! Both engines operate on whatever residual they are handed (true or
//! preconditioned); they know nothing about preconditioning.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::VecDeque;

/// Curvature admission threshold for L-BFGS pairs.
pub const CURVATURE_EPS: f64 = 1e-10;
/// Tikhonov factor for the Anderson inner system.
pub const AA_REGULARIZATION: f64 = 1e-12;

/// Bounded store of secant pairs.
#[derive(Debug, Clone)]
pub struct SecantHistory {
    capacity: usize,
    pairs: VecDeque<(DVector<f64>, DVector<f64>)>,
    gamma: f64,
    /// Some(eps): enforce <s,y> > eps ||s|| ||y|| (L-BFGS); None: store
    /// unconditionally (Anderson).
    curvature_eps: Option<f64>,
}

impl SecantHistory {
    /// History for L-BFGS: curvature-guarded admission, gamma tracking.
    pub fn lbfgs(capacity: usize) -> Self {
        assert!(capacity >= 1, "secant memory must be at least 1");
        SecantHistory {
            capacity,
            pairs: VecDeque::with_capacity(capacity + 1),
            gamma: 1.0,
            curvature_eps: Some(CURVATURE_EPS),
        }
    }

    /// History for type-I Anderson acceleration: unconditional admission.
    pub fn anderson(capacity: usize) -> Self {
        assert!(capacity >= 1, "secant memory must be at least 1");
        SecantHistory {
            capacity,
            pairs: VecDeque::with_capacity(capacity + 1),
            gamma: 1.0,
            curvature_eps: None,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Scale of the implicit initial approximation B0 = gamma^-1 I.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Oldest-to-newest view of the stored pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (&DVector<f64>, &DVector<f64>)> {
        self.pairs.iter().map(|(s, y)| (s, y))
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
        self.gamma = 1.0;
    }

    /// Append a pair, evicting the oldest at capacity. Returns whether
    /// the pair was admitted.
    pub fn push_pair(&mut self, s: DVector<f64>, y: DVector<f64>) -> Result<bool> {
        if s.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: y.len(),
            });
        }
        if let Some(eps) = self.curvature_eps {
            let sy = s.dot(&y);
            if !(sy > eps * s.norm() * y.norm()) {
                return Ok(false);
            }
            self.gamma = sy / y.dot(&y);
        }
        self.pairs.push_back((s, y));
        if self.pairs.len() > self.capacity {
            self.pairs.pop_front();
        }
        Ok(true)
    }

    /// Two-loop recursion: returns -(B^-1) r for the L-BFGS operator
    /// with B0 = gamma^-1 I. Empty history gives -gamma r.
    pub fn lbfgs_apply_inverse(&self, r: &DVector<f64>) -> DVector<f64> {
        let mut q = r.clone();
        let m = self.pairs.len();
        let mut alphas = vec![0.0; m];
        let mut rhos = vec![0.0; m];
        for (k, (s, y)) in self.pairs.iter().enumerate().rev() {
            let rho = 1.0 / s.dot(y);
            let alpha = rho * s.dot(&q);
            q.axpy(-alpha, y, 1.0);
            alphas[k] = alpha;
            rhos[k] = rho;
        }
        q *= self.gamma;
        for (k, (s, y)) in self.pairs.iter().enumerate() {
            let beta = rhos[k] * y.dot(&q);
            q.axpy(alphas[k] - beta, s, 1.0);
        }
        -q
    }

    /// Anderson type-I inverse action: returns (-(B^-1) r, fell_back).
    ///
    /// B^-1 = I - (Y - S)(S^T Y + lambda I)^-1 S^T by Sherman-Morrison-
    /// Woodbury applied to the regularized operator. If the inner system
    /// cannot be solved, falls back to the identity (direction -r) and
    /// reports it.
    pub fn aa1_apply_inverse(&self, r: &DVector<f64>) -> (DVector<f64>, bool) {
        let m = self.pairs.len();
        if m == 0 {
            return (-r, false);
        }
        let lambda = self.aa_lambda();
        let mut inner = DMatrix::zeros(m, m);
        for (i, (s_i, _)) in self.pairs.iter().enumerate() {
            for (j, (_, y_j)) in self.pairs.iter().enumerate() {
                inner[(i, j)] = s_i.dot(y_j);
            }
            inner[(i, i)] += lambda;
        }
        let rhs = DVector::from_fn(m, |i, _| self.pairs[i].0.dot(r));
        let Some(w) = inner.lu().solve(&rhs) else {
            return (-r, true);
        };
        let mut d = -r;
        for (k, (s, y)) in self.pairs.iter().enumerate() {
            d.axpy(w[k], y, 1.0);
            d.axpy(-w[k], s, 1.0);
        }
        if d.iter().all(|v| v.is_finite()) {
            (d, false)
        } else {
            (-r, true)
        }
    }

    /// Regularization shift lambda = lambda0 * trace(S^T S) / m.
    pub fn aa_lambda(&self) -> f64 {
        let m = self.pairs.len();
        if m == 0 {
            return 0.0;
        }
        let trace: f64 = self.pairs.iter().map(|(s, _)| s.norm_squared()).sum();
        AA_REGULARIZATION * trace / m as f64
    }
}

/// Dense reference constructions of the approximate Hessians. These are
/// the independent oracles the limited-memory code is tested against;
/// nothing in the solver path uses them.
pub mod dense_reference {
    use super::SecantHistory;
    use nalgebra::{DMatrix, DVector};

    fn stacked(hist: &SecantHistory) -> (DMatrix<f64>, DMatrix<f64>, usize) {
        let m = hist.len();
        let n = hist.pairs().next().map_or(0, |(s, _)| s.len());
        let mut s_mat = DMatrix::zeros(n, m);
        let mut y_mat = DMatrix::zeros(n, m);
        for (k, (s, y)) in hist.pairs().enumerate() {
            s_mat.set_column(k, s);
            y_mat.set_column(k, y);
        }
        (s_mat, y_mat, n)
    }

    /// Compact-form L-BFGS approximate Hessian
    /// B = B0 - [B0 S, Y] [[S^T B0 S, L], [L^T, -D]]^-1 [S^T B0; Y^T]
    /// with B0 = gamma^-1 I, L/D the strictly-lower/diagonal parts of
    /// S^T Y.
    pub fn lbfgs_b(hist: &SecantHistory) -> DMatrix<f64> {
        let (s, y, n) = stacked(hist);
        let m = hist.len();
        let b0 = DMatrix::identity(n, n) / hist.gamma();
        if m == 0 {
            return b0;
        }
        let sty = s.transpose() * &y;
        let mut l = DMatrix::zeros(m, m);
        let mut d = DMatrix::zeros(m, m);
        for i in 0..m {
            d[(i, i)] = sty[(i, i)];
            for j in 0..i {
                l[(i, j)] = sty[(i, j)];
            }
        }
        let b0s = &b0 * &s;
        let mut middle = DMatrix::zeros(2 * m, 2 * m);
        middle.view_mut((0, 0), (m, m)).copy_from(&(s.transpose() * &b0s));
        middle.view_mut((0, m), (m, m)).copy_from(&l);
        middle.view_mut((m, 0), (m, m)).copy_from(&l.transpose());
        middle.view_mut((m, m), (m, m)).copy_from(&(-&d));
        let mut wide = DMatrix::zeros(n, 2 * m);
        wide.view_mut((0, 0), (n, m)).copy_from(&b0s);
        wide.view_mut((0, m), (n, m)).copy_from(&y);
        let inv = middle.lu().try_inverse().expect("compact middle invertible");
        &b0 - &wide * inv * wide.transpose()
    }

    /// Dense type-I Anderson approximate Hessian
    /// B = I + (Y - S)(S^T S + lambda I)^-1 S^T, with the same
    /// regularization shift the low-rank path uses.
    pub fn aa1_b(hist: &SecantHistory) -> DMatrix<f64> {
        let (s, y, n) = stacked(hist);
        let m = hist.len();
        if m == 0 {
            return DMatrix::identity(n, n);
        }
        let mut sts = s.transpose() * &s;
        let lambda = hist.aa_lambda();
        for i in 0..m {
            sts[(i, i)] += lambda;
        }
        let inv = sts.lu().try_inverse().expect("regularized S^T S invertible");
        DMatrix::identity(n, n) + (&y - &s) * inv * s.transpose()
    }

    /// Direction -(B^-1) r computed densely.
    pub fn apply_inverse(b: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
        b.clone().lu().solve(&(-r)).expect("reference B invertible")
    }
}
