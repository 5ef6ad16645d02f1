//! Small sparse linear-algebra kernel: CSR storage, a banded LDL^T
//! factorization for the SPD systems arising from Q1 discretizations on
//! structured grids, and a Jacobi-preconditioned conjugate-gradient
//! fallback.
//!
//! Everything here is deterministic: no pivot reordering, no randomized
//! algorithms, fixed accumulation order.

mod band;
mod cg;
mod csr;

pub use band::BandLdl;
pub use cg::conjugate_gradient;
pub use csr::{CsrMatrix, CsrPattern};

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Which linear solver the Newton-type methods use for `H p = -g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearSolver {
    /// Banded LDL^T factorization (direct). Default at desk scale.
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient { rel_tol: f64, max_iter: usize },
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver::Direct
    }
}

impl LinearSolver {
    /// Solve `A x = b` for symmetric positive definite `A`.
    pub fn solve(&self, a: &CsrMatrix, b: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            LinearSolver::Direct => {
                let ldl = BandLdl::factor(a)?;
                Ok(ldl.solve(b))
            }
            LinearSolver::ConjugateGradient { rel_tol, max_iter } => {
                conjugate_gradient(a, b, *rel_tol, *max_iter)
            }
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}
