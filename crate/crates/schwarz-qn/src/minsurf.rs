//! Q1 finite-element evaluation of the minimal-surface functional
//!
//!   energy(u) = integral over (0,1)^2 of sqrt(1 + |grad u|^2)
//!
//! with 2x2 Gauss quadrature per element. Dirichlet nodes are handled by
//! logical elimination: gradient entries at constrained nodes are zeroed
//! and Hessian rows/columns replaced by identity, so every solver works
//! with full-length nodal vectors.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, CsrPattern};
use crate::mesh::{dirichlet_values, Mesh};
use crate::problem::Objective;
use nalgebra::DVector;

/// Reference-element shape-function gradients at the 2x2 Gauss points,
/// already mapped to physical coordinates (constant across a uniform
/// grid). `table[q][a] = (dN_a/dx, dN_a/dy)` at quadrature point `q`.
fn shape_gradient_table(hx: f64, hy: f64) -> [[(f64, f64); 4]; 4] {
    let g = 1.0 / 3.0f64.sqrt();
    let pts = [(-g, -g), (g, -g), (g, g), (-g, g)];
    let mut table = [[(0.0, 0.0); 4]; 4];
    for (q, &(xi, eta)) in pts.iter().enumerate() {
        // counterclockwise: (-1,-1), (1,-1), (1,1), (-1,1)
        let dxi = [
            -(1.0 - eta) / 4.0,
            (1.0 - eta) / 4.0,
            (1.0 + eta) / 4.0,
            -(1.0 + eta) / 4.0,
        ];
        let deta = [
            -(1.0 - xi) / 4.0,
            -(1.0 + xi) / 4.0,
            (1.0 + xi) / 4.0,
            (1.0 - xi) / 4.0,
        ];
        for a in 0..4 {
            table[q][a] = (dxi[a] * 2.0 / hx, deta[a] * 2.0 / hy);
        }
    }
    table
}

fn check_len(mesh: &Mesh, u: &DVector<f64>) -> Result<()> {
    if u.len() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_nodes(),
            got: u.len(),
        });
    }
    Ok(())
}

/// Surface area of the graph of `u`.
pub fn energy(mesh: &Mesh, u: &DVector<f64>) -> Result<f64> {
    check_len(mesh, u)?;
    let (hx, hy) = mesh.spacing();
    let table = shape_gradient_table(hx, hy);
    let w = mesh.jacobian_det();
    let mut total = 0.0;
    for conn in mesh.elem_conn() {
        let ue = [u[conn[0]], u[conn[1]], u[conn[2]], u[conn[3]]];
        for grads in &table {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for a in 0..4 {
                gx += ue[a] * grads[a].0;
                gy += ue[a] * grads[a].1;
            }
            total += w * (1.0 + gx * gx + gy * gy).sqrt();
        }
    }
    Ok(total)
}

/// Nodal gradient of `energy`, with constrained entries set to zero.
pub fn gradient(mesh: &Mesh, u: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(mesh, u)?;
    let (hx, hy) = mesh.spacing();
    let table = shape_gradient_table(hx, hy);
    let w = mesh.jacobian_det();
    let mut g = DVector::zeros(mesh.num_nodes());
    for conn in mesh.elem_conn() {
        let ue = [u[conn[0]], u[conn[1]], u[conn[2]], u[conn[3]]];
        let mut ge = [0.0; 4];
        for grads in &table {
            let mut gx = 0.0;
            let mut gy = 0.0;
            for a in 0..4 {
                gx += ue[a] * grads[a].0;
                gy += ue[a] * grads[a].1;
            }
            let s = (1.0 + gx * gx + gy * gy).sqrt();
            for a in 0..4 {
                ge[a] += w * (gx * grads[a].0 + gy * grads[a].1) / s;
            }
        }
        for a in 0..4 {
            g[conn[a]] += ge[a];
        }
    }
    for n in 0..mesh.num_nodes() {
        if mesh.is_constrained(n) {
            g[n] = 0.0;
        }
    }
    Ok(g)
}

/// Sparsity pattern of the Q1 stencil (9-point) on `mesh`, plus the
/// per-element scatter positions for fast repeated assembly.
pub struct HessianWorkspace {
    pattern: CsrPattern,
    scatter: Vec<[usize; 16]>,
}

impl HessianWorkspace {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.num_nodes();
        let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(9); n];
        for conn in mesh.elem_conn() {
            for &a in conn {
                for &b in conn {
                    rows[a].push(b);
                }
            }
        }
        let pattern = CsrPattern::from_rows(n, rows).expect("in-range stencil");
        let mut scatter = Vec::with_capacity(mesh.num_elements());
        for conn in mesh.elem_conn() {
            let mut pos = [0usize; 16];
            for (ia, &a) in conn.iter().enumerate() {
                for (ib, &b) in conn.iter().enumerate() {
                    pos[ia * 4 + ib] = pattern.find(a, b).expect("stencil entry");
                }
            }
            scatter.push(pos);
        }
        HessianWorkspace { pattern, scatter }
    }

    /// Assemble the Hessian of `energy` at `u` into a fresh value array.
    pub fn assemble(&self, mesh: &Mesh, u: &DVector<f64>) -> Result<CsrMatrix> {
        check_len(mesh, u)?;
        let (hx, hy) = mesh.spacing();
        let table = shape_gradient_table(hx, hy);
        let w = mesh.jacobian_det();
        let mut h = CsrMatrix::zeros_from_pattern(self.pattern.clone());
        {
            let vals = h.values_mut();
            for (conn, pos) in mesh.elem_conn().iter().zip(&self.scatter) {
                let ue = [u[conn[0]], u[conn[1]], u[conn[2]], u[conn[3]]];
                let mut he = [0.0f64; 16];
                for grads in &table {
                    let mut gx = 0.0;
                    let mut gy = 0.0;
                    for a in 0..4 {
                        gx += ue[a] * grads[a].0;
                        gy += ue[a] * grads[a].1;
                    }
                    let s2 = 1.0 + gx * gx + gy * gy;
                    let s = s2.sqrt();
                    let s3 = s2 * s;
                    let mut dn = [0.0f64; 4];
                    for a in 0..4 {
                        dn[a] = gx * grads[a].0 + gy * grads[a].1;
                    }
                    for a in 0..4 {
                        for b in 0..4 {
                            let metric = grads[a].0 * grads[b].0 + grads[a].1 * grads[b].1;
                            he[a * 4 + b] += w * (metric / s - dn[a] * dn[b] / s3);
                        }
                    }
                }
                for k in 0..16 {
                    vals[pos[k]] += he[k];
                }
            }
        }
        apply_dirichlet_to_hessian(mesh, &mut h);
        Ok(h)
    }
}

/// Replace constrained rows/columns by identity.
fn apply_dirichlet_to_hessian(mesh: &Mesh, h: &mut CsrMatrix) {
    for r in 0..mesh.num_nodes() {
        let constrained_row = mesh.is_constrained(r);
        let (cols, vals) = h.row_mut(r);
        for (c, v) in cols.iter().zip(vals.iter_mut()) {
            if constrained_row {
                *v = if *c == r { 1.0 } else { 0.0 };
            } else if mesh.is_constrained(*c) {
                *v = 0.0;
            }
        }
    }
}

/// Hessian of `energy` at `u` (one-shot; builds the pattern each call).
pub fn hessian(mesh: &Mesh, u: &DVector<f64>) -> Result<CsrMatrix> {
    HessianWorkspace::new(mesh).assemble(mesh, u)
}

/// The minimal-surface problem on a mesh, as an [`Objective`].
pub struct MinimalSurface {
    mesh: Mesh,
    workspace: HessianWorkspace,
    boundary: DVector<f64>,
}

impl MinimalSurface {
    pub fn new(mesh: Mesh) -> Self {
        let workspace = HessianWorkspace::new(&mesh);
        let boundary = dirichlet_values(&mesh);
        MinimalSurface {
            mesh,
            workspace,
            boundary,
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Zero at interior nodes, prescribed trace on the boundary.
    pub fn initial_guess(&self) -> DVector<f64> {
        self.boundary.clone()
    }

    pub fn boundary_values(&self) -> &DVector<f64> {
        &self.boundary
    }
}

impl Objective for MinimalSurface {
    fn dimension(&self) -> usize {
        self.mesh.num_nodes()
    }

    fn eval(&self, x: &DVector<f64>) -> f64 {
        energy(&self.mesh, x).expect("dimension checked by caller")
    }

    fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        gradient(&self.mesh, x).expect("dimension checked by caller")
    }

    fn hess(&self, x: &DVector<f64>) -> Option<CsrMatrix> {
        Some(self.workspace.assemble(&self.mesh, x).expect("dimension checked by caller"))
    }
}
