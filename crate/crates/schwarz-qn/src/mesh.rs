//! Structured quadrilateral meshes of the unit square.
//!
//! Nodes are ordered lexicographically by (row, column): node `(i, j)`
//! has id `j * (nx + 1) + i` and coordinates `(i / nx, j / ny)`. Elements
//! follow the same ordering with counterclockwise connectivity.

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Which part of the boundary a node belongs to. Corner ties resolve to
/// Left/Right over Bottom/Top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Interior,
    Left,
    Right,
    Bottom,
    Top,
}

/// Uniform quadrilateral grid on (0,1)^2.
#[derive(Debug, Clone)]
pub struct Mesh {
    nx: usize,
    ny: usize,
    node_coords: Vec<[f64; 2]>,
    elem_conn: Vec<[usize; 4]>,
    boundary_tags: Vec<BoundaryTag>,
}

/// Build an `nx` by `ny` element grid.
pub fn build_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::invalid("element counts must be at least 1"));
    }
    let nnx = nx + 1;
    let nny = ny + 1;
    let mut node_coords = Vec::with_capacity(nnx * nny);
    let mut boundary_tags = Vec::with_capacity(nnx * nny);
    for j in 0..nny {
        for i in 0..nnx {
            node_coords.push([i as f64 / nx as f64, j as f64 / ny as f64]);
            let tag = if i == 0 {
                BoundaryTag::Left
            } else if i == nx {
                BoundaryTag::Right
            } else if j == 0 {
                BoundaryTag::Bottom
            } else if j == ny {
                BoundaryTag::Top
            } else {
                BoundaryTag::Interior
            };
            boundary_tags.push(tag);
        }
    }
    let mut elem_conn = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let n0 = j * nnx + i;
            elem_conn.push([n0, n0 + 1, n0 + nnx + 1, n0 + nnx]);
        }
    }
    Ok(Mesh {
        nx,
        ny,
        node_coords,
        elem_conn,
        boundary_tags,
    })
}

impl Mesh {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn num_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elem_conn.len()
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    pub fn elem_conn(&self) -> &[[usize; 4]] {
        &self.elem_conn
    }

    pub fn boundary_tags(&self) -> &[BoundaryTag] {
        &self.boundary_tags
    }

    /// Grid spacing (hx, hy).
    pub fn spacing(&self) -> (f64, f64) {
        (1.0 / self.nx as f64, 1.0 / self.ny as f64)
    }

    /// Jacobian determinant of the reference-to-physical map; constant
    /// for a uniform axis-aligned grid.
    pub fn jacobian_det(&self) -> f64 {
        let (hx, hy) = self.spacing();
        hx * hy / 4.0
    }

    pub fn is_constrained(&self, node: usize) -> bool {
        self.boundary_tags[node] != BoundaryTag::Interior
    }

    /// Node id for grid coordinates (i, j).
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Grid coordinates (i, j) of a node id.
    pub fn grid_coords(&self, node: usize) -> (usize, usize) {
        (node % (self.nx + 1), node / (self.nx + 1))
    }

    /// Ids of all unconstrained (interior) nodes, ascending.
    pub fn unconstrained_dofs(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&n| !self.is_constrained(n))
            .collect()
    }
}

/// Prescribed boundary values: sinusoidal traces on the four sides,
/// zero at interior nodes.
pub fn dirichlet_values(mesh: &Mesh) -> DVector<f64> {
    let tau = std::f64::consts::TAU;
    let mut g = DVector::zeros(mesh.num_nodes());
    for (n, &[x1, x2]) in mesh.node_coords().iter().enumerate() {
        g[n] = match mesh.boundary_tags()[n] {
            BoundaryTag::Interior => 0.0,
            BoundaryTag::Left => -0.5 * (tau * x2).sin(),
            BoundaryTag::Right => 0.5 * (tau * x2).sin(),
            BoundaryTag::Bottom => -0.5 * (tau * x1).sin(),
            BoundaryTag::Top => 0.5 * (tau * x1).sin(),
        };
    }
    g
}
