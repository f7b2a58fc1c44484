//! Linear simplicial meshes in 1D (segments), 2D (triangles) and 3D (tetrahedra).
//!
//! Coordinates and connectivity are stored as flat arrays with a stride of
//! `dim` and `dim + 1` respectively. Boundary nodes are identified
//! topologically: a node is on the boundary when it lies on a facet that has
//! no sibling in the half-facet map.

mod generate;
mod half_facet;
mod io;
mod quality;
mod rings;

pub use generate::{generate_box_mesh, generate_disc_mesh, graded_interval_mesh};
pub use half_facet::{build_half_facets, HalfFacet, HalfFacetMap};
pub use io::{load_mesh, save_native, save_node_ele, MeshFormat};
pub use quality::{altitude_foot, distort_mesh, mesh_quality, total_volume};
pub use rings::{
    ring_for_degree, ring_neighborhood, select_stencil, Fraction, RingSpec, Stencil,
    DEFAULT_STENCIL_RATIO,
};

use crate::error::{Error, Result};

/// Per-node boundary classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    coords: Vec<f64>,
    elems: Vec<usize>,
    tags: Vec<NodeTag>,
}

impl Mesh {
    /// Builds a mesh from flat coordinate and connectivity arrays.
    ///
    /// Elements with negative signed volume are reoriented by swapping their
    /// first two vertices. Boundary tags are derived from the facet topology.
    pub fn new(dim: usize, coords: Vec<f64>, mut elems: Vec<usize>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidMesh(format!("unsupported dimension {dim}")));
        }
        if coords.len() % dim != 0 {
            return Err(Error::InvalidMesh(format!(
                "coordinate array length {} is not a multiple of {dim}",
                coords.len()
            )));
        }
        let nv = dim + 1;
        if elems.len() % nv != 0 {
            return Err(Error::InvalidMesh(format!(
                "connectivity length {} is not a multiple of {nv}",
                elems.len()
            )));
        }
        let node_count = coords.len() / dim;
        for (e, conn) in elems.chunks_exact_mut(nv).enumerate() {
            for (k, &v) in conn.iter().enumerate() {
                if v >= node_count {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} references missing node {v}"
                    )));
                }
                if conn[..k].contains(&v) {
                    return Err(Error::InvalidMesh(format!(
                        "element {e} repeats node {v}"
                    )));
                }
            }
            let vol = signed_volume(dim, &coords, conn);
            if vol == 0.0 || !vol.is_finite() {
                return Err(Error::DegenerateElement(e));
            }
            if vol < 0.0 {
                conn.swap(0, 1);
            }
        }
        let mut mesh = Mesh {
            dim,
            coords,
            elems,
            tags: vec![NodeTag::Interior; node_count],
        };
        let hf = build_half_facets(&mesh)?;
        mesh.tags = hf.boundary_tags(&mesh);
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn elem_count(&self) -> usize {
        self.elems.len() / (self.dim + 1)
    }

    pub fn nodes_per_elem(&self) -> usize {
        self.dim + 1
    }

    pub fn coord(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn elem(&self, e: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.elems[e * nv..(e + 1) * nv]
    }

    pub fn elems(&self) -> &[usize] {
        &self.elems
    }

    pub fn tag(&self, v: usize) -> NodeTag {
        self.tags[v]
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.tags[v] == NodeTag::Dirichlet
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&v| self.is_boundary(v))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(|&v| !self.is_boundary(v))
    }

    /// Signed volume (length, area) of element `e`.
    pub fn elem_volume(&self, e: usize) -> f64 {
        signed_volume(self.dim, &self.coords, self.elem(e))
    }

    /// Vertex coordinates of element `e`, padded to 3 components.
    pub fn elem_vertices(&self, e: usize) -> Vec<[f64; 3]> {
        self.elem(e).iter().map(|&v| self.point(v)).collect()
    }

    /// Coordinates of node `v` padded to 3 components.
    pub fn point(&self, v: usize) -> [f64; 3] {
        let mut p = [0.0; 3];
        p[..self.dim].copy_from_slice(self.coord(v));
        p
    }

    pub(crate) fn set_coord(&mut self, v: usize, x: &[f64]) {
        let d = self.dim;
        self.coords[v * d..(v + 1) * d].copy_from_slice(&x[..d]);
    }
}

pub(crate) fn signed_volume(dim: usize, coords: &[f64], conn: &[usize]) -> f64 {
    let p = |v: usize, k: usize| coords[v * dim + k];
    match dim {
        1 => p(conn[1], 0) - p(conn[0], 0),
        2 => {
            let (a, b, c) = (conn[0], conn[1], conn[2]);
            0.5 * ((p(b, 0) - p(a, 0)) * (p(c, 1) - p(a, 1))
                - (p(c, 0) - p(a, 0)) * (p(b, 1) - p(a, 1)))
        }
        3 => {
            let o = conn[0];
            let mut m = [[0.0; 3]; 3];
            for (r, &v) in conn[1..].iter().enumerate() {
                for k in 0..3 {
                    m[r][k] = p(v, k) - p(o, k);
                }
            }
            det3(&m) / 6.0
        }
        _ => unreachable!(),
    }
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reorients_negative_elements() {
        let m = Mesh::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0], vec![0, 1, 2]).unwrap();
        assert!(m.elem_volume(0) > 0.0);
        assert_eq!(m.elem(0), &[1, 0, 2]);
    }

    #[test]
    fn rejects_missing_node() {
        let err = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 3]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn rejects_repeated_node() {
        let err = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 1]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn rejects_zero_volume() {
        let err = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0], vec![0, 1, 2]).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement(0)));
    }

    #[test]
    fn single_triangle_all_boundary() {
        let m = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2]).unwrap();
        assert_eq!(m.boundary_nodes().count(), 3);
    }
}
