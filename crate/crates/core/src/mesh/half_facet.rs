//! Array-based half-facet adjacency.
//!
//! Local facet `f` of an element consists of every vertex except local vertex
//! `f`. Each (element, local facet) pair is a half-facet; two half-facets that
//! cover the same facet are siblings. Boundary half-facets have no sibling.

use std::collections::HashMap;

use super::{Mesh, NodeTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfFacet {
    pub elem: usize,
    pub facet: usize,
}

#[derive(Debug, Clone)]
pub struct HalfFacetMap {
    nodes_per_elem: usize,
    sibling: Vec<Option<HalfFacet>>,
    v2hf: Vec<Option<HalfFacet>>,
}

/// Builds sibling half-facets and the vertex-to-half-facet map.
pub fn build_half_facets(mesh: &Mesh) -> Result<HalfFacetMap> {
    let nv = mesh.nodes_per_elem();
    let ne = mesh.elem_count();
    let mut sibling = vec![None; ne * nv];
    let mut owners: HashMap<[usize; 3], Vec<HalfFacet>> = HashMap::with_capacity(ne * nv);
    for e in 0..ne {
        let conn = mesh.elem(e);
        for f in 0..nv {
            owners
                .entry(facet_key(conn, f))
                .or_default()
                .push(HalfFacet { elem: e, facet: f });
        }
    }
    for (key, hfs) in &owners {
        match hfs.as_slice() {
            [_] => {}
            [a, b] => {
                sibling[a.elem * nv + a.facet] = Some(*b);
                sibling[b.elem * nv + b.facet] = Some(*a);
            }
            _ => {
                let nodes = key.iter().copied().filter(|&v| v != usize::MAX).collect();
                return Err(Error::NonManifoldFacet(nodes));
            }
        }
    }

    let mut v2hf: Vec<Option<HalfFacet>> = vec![None; mesh.node_count()];
    for e in 0..ne {
        let conn = mesh.elem(e);
        for f in 0..nv {
            let hf = HalfFacet { elem: e, facet: f };
            let is_border = sibling[e * nv + f].is_none();
            for (k, &v) in conn.iter().enumerate() {
                if k == f {
                    continue;
                }
                let slot = &mut v2hf[v];
                let replace = match slot {
                    None => true,
                    Some(cur) => is_border && sibling[cur.elem * nv + cur.facet].is_some(),
                };
                if replace {
                    *slot = Some(hf);
                }
            }
        }
    }

    Ok(HalfFacetMap {
        nodes_per_elem: nv,
        sibling,
        v2hf,
    })
}

fn facet_key(conn: &[usize], f: usize) -> [usize; 3] {
    let mut key = [usize::MAX; 3];
    let mut k = 0;
    for (i, &v) in conn.iter().enumerate() {
        if i != f {
            key[k] = v;
            k += 1;
        }
    }
    key[..k].sort_unstable();
    key
}

impl HalfFacetMap {
    pub fn sibling(&self, hf: HalfFacet) -> Option<HalfFacet> {
        self.sibling[hf.elem * self.nodes_per_elem + hf.facet]
    }

    pub fn v2hf(&self, v: usize) -> Option<HalfFacet> {
        self.v2hf[v]
    }

    pub fn half_facet_count(&self) -> usize {
        self.sibling.len()
    }

    pub fn boundary_half_facets(&self) -> impl Iterator<Item = HalfFacet> + '_ {
        let nv = self.nodes_per_elem;
        self.sibling
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(move |(i, _)| HalfFacet {
                elem: i / nv,
                facet: i % nv,
            })
    }

    /// Nodes of the facet referenced by a half-facet.
    pub fn facet_nodes(&self, mesh: &Mesh, hf: HalfFacet) -> Vec<usize> {
        mesh.elem(hf.elem)
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != hf.facet)
            .map(|(_, &v)| v)
            .collect()
    }

    pub(crate) fn boundary_tags(&self, mesh: &Mesh) -> Vec<NodeTag> {
        let mut tags = vec![NodeTag::Interior; mesh.node_count()];
        for hf in self.boundary_half_facets() {
            for v in self.facet_nodes(mesh, hf) {
                tags[v] = NodeTag::Dirichlet;
            }
        }
        tags
    }

    /// Elements incident on node `v`, found by walking sibling half-facets
    /// around `v` starting from `v2hf(v)`. Output is sorted.
    pub fn incident_elements(&self, mesh: &Mesh, v: usize, out: &mut Vec<usize>) {
        out.clear();
        let Some(start) = self.v2hf[v] else {
            return;
        };
        let nv = self.nodes_per_elem;
        out.push(start.elem);
        let mut head = 0;
        while head < out.len() {
            let e = out[head];
            head += 1;
            let conn = mesh.elem(e);
            let lv = conn.iter().position(|&x| x == v).expect("vertex in element");
            for f in 0..nv {
                if f == lv {
                    continue;
                }
                if let Some(s) = self.sibling(HalfFacet { elem: e, facet: f }) {
                    if !out.contains(&s.elem) {
                        out.push(s.elem);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_mesh;

    #[test]
    fn single_triangle_has_no_siblings() {
        let m = Mesh::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2]).unwrap();
        let hf = build_half_facets(&m).unwrap();
        assert_eq!(hf.boundary_half_facets().count(), 3);
    }

    #[test]
    fn two_triangles_share_one_edge() {
        let m = Mesh::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            vec![0, 1, 2, 0, 2, 3],
        )
        .unwrap();
        let hf = build_half_facets(&m).unwrap();
        assert_eq!(hf.boundary_half_facets().count(), 4);
        let paired: Vec<_> = (0..2)
            .flat_map(|e| (0..3).map(move |f| HalfFacet { elem: e, facet: f }))
            .filter(|&h| hf.sibling(h).is_some())
            .collect();
        assert_eq!(paired.len(), 2);
        assert_eq!(hf.sibling(paired[0]), Some(paired[1]));
    }

    #[test]
    fn box_perimeter_count() {
        let m = generate_box_mesh(2, 4, 0.0, 0).unwrap();
        let hf = build_half_facets(&m).unwrap();
        assert_eq!(hf.boundary_half_facets().count(), 16);
    }

    #[test]
    fn non_manifold_edge_is_reported() {
        let m = Mesh::new(
            2,
            vec![0.0, 0.0, 1.0, 0.0, 0.5, 1.0, 0.5, -1.0, 0.5, 0.5],
            vec![0, 1, 2, 1, 0, 3, 0, 1, 4],
        )
        .unwrap_err();
        assert!(matches!(m, Error::NonManifoldFacet(ref n) if n == &vec![0, 1]));
    }

    #[test]
    fn incident_elements_interior_node() {
        let m = generate_box_mesh(2, 4, 0.0, 0).unwrap();
        let hf = build_half_facets(&m).unwrap();
        let mut out = Vec::new();
        // node (2,2)
        hf.incident_elements(&m, 12, &mut out);
        assert_eq!(out.len(), 6);
        for &e in &out {
            assert!(m.elem(e).contains(&12));
        }
    }

    #[test]
    fn v2hf_prefers_boundary() {
        let m = generate_box_mesh(2, 3, 0.0, 0).unwrap();
        let hf = build_half_facets(&m).unwrap();
        for v in m.boundary_nodes() {
            let h = hf.v2hf(v).unwrap();
            assert!(hf.sibling(h).is_none(), "node {v}");
            assert!(hf.facet_nodes(&m, h).contains(&v));
        }
    }
}
