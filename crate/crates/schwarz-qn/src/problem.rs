//! Objective-function abstraction decoupling the solvers from any
//! particular discretization, plus restriction of an objective to a
//! subspace with the complement frozen.

use crate::decomposition::Subspace;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use nalgebra::DVector;

/// A twice-differentiable function of a nodal vector. `grad` must be the
/// exact derivative of `eval`; `hess`, when provided, the exact
/// derivative of `grad`. Evaluations are pure, so concurrent calls at
/// distinct points are safe.
pub trait Objective: Send + Sync {
    fn dimension(&self) -> usize;

    fn eval(&self, x: &DVector<f64>) -> f64;

    fn grad(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Second derivatives, for Newton-based inner solvers. Defaults to
    /// unavailable.
    fn hess(&self, _x: &DVector<f64>) -> Option<CsrMatrix> {
        None
    }
}

/// An objective restricted to a subspace: dofs inside the subspace are
/// free, everything else is frozen at the anchor point. Evaluation goes
/// through the parent on the composite vector, so local and global
/// quantities agree exactly (same assembly code path).
pub struct RestrictedObjective<'a> {
    parent: &'a dyn Objective,
    subspace: &'a Subspace,
    anchor: DVector<f64>,
}

/// Restrict `parent` to `subspace`, freezing the complement at `anchor`.
pub fn restrict_objective<'a>(
    parent: &'a dyn Objective,
    subspace: &'a Subspace,
    anchor: &DVector<f64>,
) -> Result<RestrictedObjective<'a>> {
    if anchor.len() != parent.dimension() {
        return Err(Error::DimensionMismatch {
            expected: parent.dimension(),
            got: anchor.len(),
        });
    }
    if subspace.global_dim() != parent.dimension() {
        return Err(Error::invalid(
            "subspace was built for a different global dimension",
        ));
    }
    Ok(RestrictedObjective {
        parent,
        subspace,
        anchor: anchor.clone(),
    })
}

impl RestrictedObjective<'_> {
    /// Write the local vector into a copy of the anchor.
    pub fn compose(&self, z: &DVector<f64>) -> DVector<f64> {
        assert_eq!(z.len(), self.subspace.overlap_dofs().len());
        let mut w = self.anchor.clone();
        for (k, &g) in self.subspace.overlap_dofs().iter().enumerate() {
            w[g] = z[k];
        }
        w
    }
}

impl Objective for RestrictedObjective<'_> {
    fn dimension(&self) -> usize {
        self.subspace.overlap_dofs().len()
    }

    fn eval(&self, z: &DVector<f64>) -> f64 {
        self.parent.eval(&self.compose(z))
    }

    fn grad(&self, z: &DVector<f64>) -> DVector<f64> {
        let g = self.parent.grad(&self.compose(z));
        self.subspace.restrict(&g).expect("anchor length checked")
    }

    fn hess(&self, z: &DVector<f64>) -> Option<CsrMatrix> {
        let h = self.parent.hess(&self.compose(z))?;
        Some(self.subspace.extract_submatrix(&h))
    }
}

/// Quadratic test objective 0.5 x^T A x - b^T x with SPD `A`.
pub struct Quadratic {
    a: CsrMatrix,
    b: DVector<f64>,
}

impl Quadratic {
    pub fn new(a: CsrMatrix, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() != b.len() {
            return Err(Error::invalid("quadratic needs square A matching b"));
        }
        Ok(Quadratic { a, b })
    }

    /// Separable instance 0.5 sum d_i x_i^2.
    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let a = CsrMatrix::from_triplets(d.len(), d.len(), &t).expect("diagonal triplets");
        Quadratic {
            a,
            b: DVector::zeros(d.len()),
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }
}

impl Objective for Quadratic {
    fn dimension(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&self.a.mul_vec(x)) - self.b.dot(x)
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.mul_vec(x) - &self.b
    }

    fn hess(&self, _x: &DVector<f64>) -> Option<CsrMatrix> {
        Some(self.a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::Subspace;
    use crate::mesh::build_mesh;
    use crate::minsurf::MinimalSurface;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_domain_restriction_is_identity() {
        let q = Quadratic::diagonal(&[1.0, 2.0, 3.0]);
        let all: Vec<usize> = (0..3).collect();
        let sub = Subspace::new(3, all.clone(), all).unwrap();
        let anchor = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let r = restrict_objective(&q, &sub, &anchor).unwrap();
        let z = DVector::from_vec(vec![1.0, 1.0, -2.0]);
        assert_eq!(r.eval(&z), q.eval(&z));
        assert_eq!(r.grad(&z), q.grad(&z));
    }

    #[test]
    fn single_dof_restriction_of_separable_quadratic() {
        let q = Quadratic::diagonal(&[1.0, 1.0, 1.0, 1.0]);
        let sub = Subspace::new(4, vec![2], vec![2]).unwrap();
        let anchor = DVector::from_vec(vec![5.0, 6.0, 7.0, 8.0]);
        let r = restrict_objective(&q, &sub, &anchor).unwrap();
        let z = DVector::from_vec(vec![-3.0]);
        assert_eq!(r.grad(&z), DVector::from_vec(vec![-3.0]));
    }

    #[test]
    fn restricted_gradient_matches_global_rows_exactly() {
        let mesh = build_mesh(4, 4).unwrap();
        let obj = MinimalSurface::new(mesh.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let anchor = DVector::from_fn(obj.dimension(), |_, _| rng.gen_range(-0.5..0.5));
        // a random subset of interior dofs
        let dofs: Vec<usize> = mesh
            .unconstrained_dofs()
            .into_iter()
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        let sub = Subspace::new(obj.dimension(), dofs.clone(), dofs.clone()).unwrap();
        let r = restrict_objective(&obj, &sub, &anchor).unwrap();
        let z = DVector::from_fn(dofs.len(), |_, _| rng.gen_range(-0.5..0.5));
        let composite = r.compose(&z);
        let global = obj.grad(&composite);
        let local = r.grad(&z);
        for (k, &g) in dofs.iter().enumerate() {
            assert_eq!(local[k], global[g], "dof {g}");
        }
        // hessian restriction picks the same square block
        let hl = r.hess(&z).unwrap();
        let hg = obj.hess(&composite).unwrap();
        for (k, &g) in dofs.iter().enumerate() {
            for (c, v) in hl.row(k) {
                assert_eq!(v, hg.get(g, dofs[c]));
            }
        }
    }

    #[test]
    fn anchor_length_checked() {
        let q = Quadratic::diagonal(&[1.0, 1.0]);
        let sub = Subspace::new(2, vec![0], vec![0]).unwrap();
        let bad = DVector::zeros(3);
        assert!(restrict_objective(&q, &sub, &bad).is_err());
    }
}
