//! Overlapping domain decomposition on the structured grid: recursive
//! bisection into owned (non-overlapping) dof sets, overlap extension by
//! element-adjacency layers, restriction/restricted-prolongation, and a
//! nested Q1 coarse space.
//!
//! Dirichlet dofs never appear in any subspace or among the coarse
//! unknowns; the owned sets of a partition tile the unconstrained dofs
//! exactly once.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, CsrPattern};
use crate::mesh::{build_mesh, Mesh};
use nalgebra::DVector;

/// One subdomain's dof index sets. `owned` are the non-overlapping dofs
/// the subdomain writes; `overlap` (a superset) are the dofs it solves
/// on. Both are sorted and contain only unconstrained dofs.
#[derive(Debug, Clone)]
pub struct Subspace {
    global_dim: usize,
    owned: Vec<usize>,
    overlap: Vec<usize>,
    /// position of each owned dof inside `overlap`
    owned_pos: Vec<usize>,
    /// global index -> position in `overlap`, usize::MAX when absent
    overlap_pos: Vec<usize>,
}

impl Subspace {
    pub fn new(global_dim: usize, mut owned: Vec<usize>, mut overlap: Vec<usize>) -> Result<Self> {
        owned.sort_unstable();
        owned.dedup();
        overlap.sort_unstable();
        overlap.dedup();
        if overlap.last().is_some_and(|&g| g >= global_dim) {
            return Err(Error::invalid("subspace dof out of range"));
        }
        let mut overlap_pos = vec![usize::MAX; global_dim];
        for (k, &g) in overlap.iter().enumerate() {
            overlap_pos[g] = k;
        }
        let mut owned_pos = Vec::with_capacity(owned.len());
        for &g in &owned {
            let p = overlap_pos[g];
            if p == usize::MAX {
                return Err(Error::invalid("owned dofs must be a subset of overlap dofs"));
            }
            owned_pos.push(p);
        }
        Ok(Subspace {
            global_dim,
            owned,
            overlap,
            owned_pos,
            overlap_pos,
        })
    }

    pub fn global_dim(&self) -> usize {
        self.global_dim
    }

    pub fn owned_dofs(&self) -> &[usize] {
        &self.owned
    }

    pub fn overlap_dofs(&self) -> &[usize] {
        &self.overlap
    }

    /// R_i^delta: gather the overlap entries of a global vector.
    pub fn restrict(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.global_dim {
            return Err(Error::DimensionMismatch {
                expected: self.global_dim,
                got: x.len(),
            });
        }
        Ok(DVector::from_fn(self.overlap.len(), |k, _| x[self.overlap[k]]))
    }

    /// P_i^0: scatter only the owned entries of a local vector into a
    /// zero global vector; overlap-only entries are discarded.
    pub fn prolong_restricted(&self, xi: &DVector<f64>) -> Result<DVector<f64>> {
        if xi.len() != self.overlap.len() {
            return Err(Error::DimensionMismatch {
                expected: self.overlap.len(),
                got: xi.len(),
            });
        }
        let mut out = DVector::zeros(self.global_dim);
        self.scatter_owned(xi, &mut out);
        Ok(out)
    }

    /// Write the owned entries of `xi` into `out` (plain assignment;
    /// owned sets of a partition are disjoint).
    pub fn scatter_owned(&self, xi: &DVector<f64>, out: &mut DVector<f64>) {
        for (&g, &p) in self.owned.iter().zip(&self.owned_pos) {
            out[g] = xi[p];
        }
    }

    /// Square submatrix of `m` on the overlap dofs.
    pub fn extract_submatrix(&self, m: &CsrMatrix) -> CsrMatrix {
        m.extract_square(&self.overlap, &self.overlap_pos)
    }
}

/// Split the unconstrained dofs of `mesh` into `n` disjoint owned sets by
/// recursive bisection of the interior index grid. Deterministic.
pub fn partition(mesh: &Mesh, n: usize) -> Result<Vec<Subspace>> {
    if n == 0 {
        return Err(Error::invalid("subdomain count must be at least 1"));
    }
    let free = mesh.unconstrained_dofs();
    if n > free.len() {
        return Err(Error::invalid(format!(
            "{n} subdomains requested but only {} unconstrained dofs",
            free.len()
        )));
    }
    // interior grid nodes form the rectangle [1, nx-1] x [1, ny-1]
    let rect = (1usize, mesh.nx() - 1, 1usize, mesh.ny() - 1);
    let mut regions = Vec::with_capacity(n);
    bisect(rect, n, &mut regions);
    let mut subs = Vec::with_capacity(n);
    for (i0, i1, j0, j1) in regions {
        let mut owned = Vec::with_capacity((i1 - i0 + 1) * (j1 - j0 + 1));
        for j in j0..=j1 {
            for i in i0..=i1 {
                owned.push(mesh.node_id(i, j));
            }
        }
        if owned.is_empty() {
            return Err(Error::invalid("partition produced an empty subdomain"));
        }
        subs.push(Subspace::new(mesh.num_nodes(), owned.clone(), owned)?);
    }
    Ok(subs)
}

fn bisect(rect: (usize, usize, usize, usize), n: usize, out: &mut Vec<(usize, usize, usize, usize)>) {
    if n == 1 {
        out.push(rect);
        return;
    }
    let (i0, i1, j0, j1) = rect;
    let w = i1 - i0 + 1;
    let h = j1 - j0 + 1;
    let n1 = n.div_ceil(2);
    let n2 = n - n1;
    // split the longer side, proportionally to the part counts
    if w >= h {
        let wl = ((w * n1 + n / 2) / n).clamp(1, w - 1);
        bisect((i0, i0 + wl - 1, j0, j1), n1, out);
        bisect((i0 + wl, i1, j0, j1), n2, out);
    } else {
        let hl = ((h * n1 + n / 2) / n).clamp(1, h - 1);
        bisect((i0, i1, j0, j0 + hl - 1), n1, out);
        bisect((i0, i1, j0 + hl, j1), n2, out);
    }
}

/// Grow each subspace's overlap set by `delta` layers of element-sharing
/// neighbors (unconstrained only). Owned sets are unchanged.
pub fn extend_overlap(mesh: &Mesh, subspaces: &[Subspace], delta: usize) -> Result<Vec<Subspace>> {
    let mut out = Vec::with_capacity(subspaces.len());
    for sub in subspaces {
        let mut member = vec![false; mesh.num_nodes()];
        for &g in sub.overlap_dofs() {
            member[g] = true;
        }
        let mut frontier: Vec<usize> = sub.overlap_dofs().to_vec();
        for _ in 0..delta {
            let mut next = Vec::new();
            for &g in &frontier {
                let (i, j) = mesh.grid_coords(g);
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let ni = i as i64 + di;
                        let nj = j as i64 + dj;
                        if ni < 0 || nj < 0 || ni > mesh.nx() as i64 || nj > mesh.ny() as i64 {
                            continue;
                        }
                        let nb = mesh.node_id(ni as usize, nj as usize);
                        if !member[nb] && !mesh.is_constrained(nb) {
                            member[nb] = true;
                            next.push(nb);
                        }
                    }
                }
            }
            frontier = next;
        }
        let overlap: Vec<usize> = (0..mesh.num_nodes()).filter(|&g| member[g]).collect();
        out.push(Subspace::new(
            mesh.num_nodes(),
            sub.owned_dofs().to_vec(),
            overlap,
        )?);
    }
    Ok(out)
}

/// Nested coarse space with Q1 interpolation. `interp` is P_0 (coarse to
/// fine), its transpose is R_0, and `inject` realizes the projection
/// Pi_0 (fine values at coincident nodes).
pub struct CoarseSpace {
    coarse_mesh: Mesh,
    fine_dim: usize,
    interp: CsrMatrix,
    inject: Vec<usize>,
}

/// Build the coarse space for an `ncx` by `ncy` element grid nested in
/// `fine` (element counts must divide evenly).
pub fn build_coarse(fine: &Mesh, ncx: usize, ncy: usize) -> Result<CoarseSpace> {
    if ncx == 0 || ncy == 0 {
        return Err(Error::invalid("coarse element counts must be at least 1"));
    }
    if fine.nx() % ncx != 0 || fine.ny() % ncy != 0 {
        return Err(Error::invalid(format!(
            "coarse grid {ncx}x{ncy} is not nested in fine grid {}x{}",
            fine.nx(),
            fine.ny()
        )));
    }
    let coarse_mesh = build_mesh(ncx, ncy)?;
    let rx = fine.nx() / ncx;
    let ry = fine.ny() / ncy;
    let denom = (rx * ry) as f64;
    let n_fine = fine.num_nodes();
    let n_coarse = coarse_mesh.num_nodes();

    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n_fine);
    let mut row_vals: Vec<Vec<f64>> = Vec::with_capacity(n_fine);
    for jf in 0..=fine.ny() {
        let jc = (jf / ry).min(ncy - 1);
        let dj = jf - jc * ry;
        for if_ in 0..=fine.nx() {
            let ic = (if_ / rx).min(ncx - 1);
            let di = if_ - ic * rx;
            // integer numerators keep coincident-node weights exact
            let corners = [
                (ic, jc, (rx - di) * (ry - dj)),
                (ic + 1, jc, di * (ry - dj)),
                (ic, jc + 1, (rx - di) * dj),
                (ic + 1, jc + 1, di * dj),
            ];
            let mut cols = Vec::with_capacity(4);
            let mut vals = Vec::with_capacity(4);
            for (ci, cj, num) in corners {
                if num > 0 {
                    cols.push(coarse_mesh.node_id(ci, cj));
                    vals.push(num as f64 / denom);
                }
            }
            // sort by column for CSR
            let mut order: Vec<usize> = (0..cols.len()).collect();
            order.sort_unstable_by_key(|&k| cols[k]);
            rows.push(order.iter().map(|&k| cols[k]).collect());
            row_vals.push(order.iter().map(|&k| vals[k]).collect());
        }
    }
    let pattern = CsrPattern::from_rows(n_coarse, rows.clone())?;
    let mut interp = CsrMatrix::zeros_from_pattern(pattern);
    for (r, (cols, vals)) in rows.iter().zip(&row_vals).enumerate() {
        for (c, v) in cols.iter().zip(vals) {
            let k = interp.pattern().find(r, *c).expect("built above");
            interp.values_mut()[k] = *v;
        }
    }

    let mut inject = Vec::with_capacity(n_coarse);
    for jc in 0..=ncy {
        for ic in 0..=ncx {
            inject.push(fine.node_id(ic * rx, jc * ry));
        }
    }
    Ok(CoarseSpace {
        coarse_mesh,
        fine_dim: n_fine,
        interp,
        inject,
    })
}

impl CoarseSpace {
    pub fn coarse_mesh(&self) -> &Mesh {
        &self.coarse_mesh
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse_mesh.num_nodes()
    }

    pub fn fine_dim(&self) -> usize {
        self.fine_dim
    }

    /// P_0: interpolate a coarse nodal vector to the fine grid.
    pub fn interpolate(&self, xc: &DVector<f64>) -> Result<DVector<f64>> {
        if xc.len() != self.coarse_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.coarse_dim(),
                got: xc.len(),
            });
        }
        Ok(self.interp.mul_vec(xc))
    }

    /// R_0 = P_0^T: restrict a fine residual/gradient to the coarse grid.
    pub fn restrict(&self, yf: &DVector<f64>) -> Result<DVector<f64>> {
        if yf.len() != self.fine_dim {
            return Err(Error::DimensionMismatch {
                expected: self.fine_dim,
                got: yf.len(),
            });
        }
        Ok(self.interp.mul_vec_transpose(yf))
    }

    /// Pi_0: fine values at the coincident nodes.
    pub fn project(&self, xf: &DVector<f64>) -> Result<DVector<f64>> {
        if xf.len() != self.fine_dim {
            return Err(Error::DimensionMismatch {
                expected: self.fine_dim,
                got: xf.len(),
            });
        }
        Ok(DVector::from_fn(self.coarse_dim(), |k, _| xf[self.inject[k]]))
    }

    pub fn interpolation_matrix(&self) -> &CsrMatrix {
        &self.interp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn single_subdomain_owns_everything() {
        let m = build_mesh(4, 4).unwrap();
        let subs = partition(&m, 1).unwrap();
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].owned_dofs(), m.unconstrained_dofs().as_slice());
    }

    #[test]
    fn partition_is_disjoint_and_complete() {
        for (nx, ny, n) in [(4, 4, 4), (5, 7, 3), (10, 10, 8), (6, 3, 5)] {
            let m = build_mesh(nx, ny).unwrap();
            let subs = partition(&m, n).unwrap();
            assert_eq!(subs.len(), n);
            let mut seen = HashSet::new();
            for s in &subs {
                assert!(!s.owned_dofs().is_empty());
                for &g in s.owned_dofs() {
                    assert!(seen.insert(g), "dof {g} owned twice");
                }
            }
            let all: HashSet<usize> = m.unconstrained_dofs().into_iter().collect();
            assert_eq!(seen, all);
        }
    }

    #[test]
    fn paper_partition_shape() {
        let m = build_mesh(200, 200).unwrap();
        let subs = partition(&m, 8).unwrap();
        assert_eq!(subs.len(), 8);
        let total: usize = subs.iter().map(|s| s.owned_dofs().len()).sum();
        assert_eq!(total, 199 * 199);
    }

    #[test]
    fn too_many_subdomains_rejected() {
        let m = build_mesh(2, 2).unwrap(); // one interior dof
        assert!(partition(&m, 2).is_err());
        assert!(partition(&m, 1).is_ok());
    }

    #[test]
    fn partition_is_deterministic() {
        let m = build_mesh(9, 6).unwrap();
        let a = partition(&m, 5).unwrap();
        let b = partition(&m, 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.owned_dofs(), y.owned_dofs());
        }
    }

    #[test]
    fn zero_overlap_is_identity() {
        let m = build_mesh(6, 6).unwrap();
        let subs = partition(&m, 4).unwrap();
        let ext = extend_overlap(&m, &subs, 0).unwrap();
        for (s, e) in subs.iter().zip(&ext) {
            assert_eq!(s.owned_dofs(), e.overlap_dofs());
        }
    }

    /// Brute-force one extension layer: all unconstrained dofs sharing an
    /// element with the set.
    fn grow_once(mesh: &Mesh, set: &HashSet<usize>) -> HashSet<usize> {
        let mut out = set.clone();
        for conn in mesh.elem_conn() {
            if conn.iter().any(|n| set.contains(n)) {
                for &n in conn {
                    if !mesh.is_constrained(n) {
                        out.insert(n);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn overlap_layers_match_element_adjacency_oracle() {
        let m = build_mesh(7, 5).unwrap();
        let subs = partition(&m, 3).unwrap();
        for delta in [1usize, 2] {
            let ext = extend_overlap(&m, &subs, delta).unwrap();
            for (s, e) in subs.iter().zip(&ext) {
                let mut want: HashSet<usize> = s.owned_dofs().iter().copied().collect();
                for _ in 0..delta {
                    want = grow_once(&m, &want);
                }
                let got: HashSet<usize> = e.overlap_dofs().iter().copied().collect();
                assert_eq!(got, want, "delta {delta}");
                assert_eq!(e.owned_dofs(), s.owned_dofs());
            }
        }
    }

    #[test]
    fn huge_overlap_saturates() {
        let m = build_mesh(5, 5).unwrap();
        let subs = partition(&m, 4).unwrap();
        let ext = extend_overlap(&m, &subs, 50).unwrap();
        let all = m.unconstrained_dofs();
        for e in &ext {
            assert_eq!(e.overlap_dofs(), all.as_slice());
        }
    }

    #[test]
    fn partition_of_unity_is_bitwise() {
        let m = build_mesh(8, 8).unwrap();
        let subs = extend_overlap(&m, &partition(&m, 4).unwrap(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DVector::from_fn(m.num_nodes(), |_, _| rng.gen_range(-1.0..1.0));
        let mut sum = DVector::zeros(m.num_nodes());
        for s in &subs {
            let local = s.restrict(&x).unwrap();
            sum += s.prolong_restricted(&local).unwrap();
        }
        for n in 0..m.num_nodes() {
            if m.is_constrained(n) {
                assert_eq!(sum[n], 0.0);
            } else {
                assert_eq!(sum[n].to_bits(), x[n].to_bits(), "dof {n}");
            }
        }
    }

    #[test]
    fn restricted_scatter_discards_overlap_only_entries() {
        let m = build_mesh(6, 6).unwrap();
        let subs = extend_overlap(&m, &partition(&m, 4).unwrap(), 1).unwrap();
        let s = &subs[0];
        // find an overlap-only position
        let owned: HashSet<usize> = s.owned_dofs().iter().copied().collect();
        let k = s
            .overlap_dofs()
            .iter()
            .position(|g| !owned.contains(g))
            .expect("overlap extends beyond owned");
        let mut xi = DVector::zeros(s.overlap_dofs().len());
        xi[k] = 1.0;
        let out = s.prolong_restricted(&xi).unwrap();
        assert_eq!(out.norm(), 0.0);
    }

    #[test]
    fn full_domain_roundtrip() {
        let m = build_mesh(4, 4).unwrap();
        let subs = partition(&m, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DVector::from_fn(m.num_nodes(), |_, _| rng.gen_range(-1.0..1.0));
        let back = subs[0]
            .prolong_restricted(&subs[0].restrict(&x).unwrap())
            .unwrap();
        for n in 0..m.num_nodes() {
            if !m.is_constrained(n) {
                assert_eq!(back[n], x[n]);
            }
        }
    }

    #[test]
    fn coarse_identity_when_same_grid() {
        let m = build_mesh(4, 4).unwrap();
        let cs = build_coarse(&m, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DVector::from_fn(m.num_nodes(), |_, _| rng.gen_range(-1.0..1.0));
        assert_eq!(cs.interpolate(&x).unwrap(), x);
        assert_eq!(cs.project(&x).unwrap(), x);
        assert_eq!(cs.restrict(&x).unwrap(), x);
    }

    #[test]
    fn non_nested_rejected() {
        let m = build_mesh(10, 10).unwrap();
        assert!(build_coarse(&m, 3, 5).is_err());
        assert!(build_coarse(&m, 0, 5).is_err());
    }

    #[test]
    fn interpolation_rows_sum_to_one() {
        let fine = build_mesh(200, 200).unwrap();
        let cs = build_coarse(&fine, 10, 10).unwrap();
        let ones = DVector::from_element(cs.coarse_dim(), 1.0);
        let lifted = cs.interpolate(&ones).unwrap();
        for n in 0..fine.num_nodes() {
            assert!((lifted[n] - 1.0).abs() < 1e-14, "node {n}: {}", lifted[n]);
        }
    }

    #[test]
    fn projection_after_interpolation_is_identity() {
        let fine = build_mesh(20, 20).unwrap();
        let cs = build_coarse(&fine, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xc = DVector::from_fn(cs.coarse_dim(), |_, _| rng.gen_range(-2.0..2.0));
        let back = cs.project(&cs.interpolate(&xc).unwrap()).unwrap();
        assert_eq!(back, xc);
    }

    #[test]
    fn restriction_is_adjoint_of_interpolation() {
        let fine = build_mesh(12, 12).unwrap();
        let cs = build_coarse(&fine, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xc = DVector::from_fn(cs.coarse_dim(), |_, _| rng.gen_range(-1.0..1.0));
        let yf = DVector::from_fn(cs.fine_dim(), |_, _| rng.gen_range(-1.0..1.0));
        let a = cs.interpolate(&xc).unwrap().dot(&yf);
        let b = xc.dot(&cs.restrict(&yf).unwrap());
        assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0));
    }
}
