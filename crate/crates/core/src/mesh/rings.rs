//! Ring neighborhoods and stencil selection.
//!
//! The 1-ring of a node holds the nodes of its incident elements and the
//! `(k+1)`-ring adds the 1-rings of every node in the `k`-ring. Fractional
//! rings refine this: starting from the `k`-ring node set `S`, an element is
//! added when at least `t` of its vertices lie in `S`:
//!
//! | dim | ring      | threshold `t` | meaning                               |
//! |-----|-----------|---------------|---------------------------------------|
//! | 2   | `k + 1/2` | 2             | triangles sharing an edge with `S`    |
//! | 3   | `k + 1/3` | 3             | tetrahedra sharing a face with `S`    |
//! | 3   | `k + 2/3` | 2             | faces sharing an edge with `S`        |
//!
//! A whole-ring step is the same rule with `t = 1`.

use std::collections::HashSet;
use std::fmt;

use super::{HalfFacetMap, Mesh};
use crate::error::{Error, Result};
use crate::glp::binomial;

pub const DEFAULT_STENCIL_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fraction {
    Zero,
    Third,
    Half,
    TwoThirds,
}

impl Fraction {
    fn sixths(self) -> usize {
        match self {
            Fraction::Zero => 0,
            Fraction::Third => 2,
            Fraction::Half => 3,
            Fraction::TwoThirds => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingSpec {
    pub whole: usize,
    pub fraction: Fraction,
}

impl RingSpec {
    pub const fn whole(k: usize) -> Self {
        RingSpec {
            whole: k,
            fraction: Fraction::Zero,
        }
    }

    pub const fn new(whole: usize, fraction: Fraction) -> Self {
        RingSpec { whole, fraction }
    }

    pub fn is_legal(&self, dim: usize) -> bool {
        self.whole >= 1
            && match (dim, self.fraction) {
                (_, Fraction::Zero) => true,
                (2, Fraction::Half) => true,
                (3, Fraction::Third | Fraction::TwoThirds) => true,
                _ => false,
            }
    }

    /// Ring size in sixths, for ordering.
    pub fn sixths(&self) -> usize {
        6 * self.whole + self.fraction.sixths()
    }

    /// Smallest legal ring strictly larger than `self`.
    pub fn next(&self, dim: usize) -> RingSpec {
        let up = RingSpec::whole(self.whole + 1);
        match (dim, self.fraction) {
            (2, Fraction::Zero) => RingSpec::new(self.whole, Fraction::Half),
            (3, Fraction::Zero) => RingSpec::new(self.whole, Fraction::Third),
            (3, Fraction::Third) => RingSpec::new(self.whole, Fraction::TwoThirds),
            _ => up,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.sixths() as f64 / 6.0
    }
}

impl PartialOrd for RingSpec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RingSpec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sixths().cmp(&other.sixths())
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.fraction {
            Fraction::Zero => write!(f, "{}", self.whole),
            Fraction::Third => write!(f, "{}+1/3", self.whole),
            Fraction::Half => write!(f, "{}+1/2", self.whole),
            Fraction::TwoThirds => write!(f, "{}+2/3", self.whole),
        }
    }
}

/// Starting ring for a degree-`degree` basis in `dim` dimensions.
pub fn ring_for_degree(dim: usize, degree: usize) -> RingSpec {
    use Fraction::*;
    match (dim, degree) {
        (2, 0..=1) => RingSpec::whole(1),
        (2, 2) => RingSpec::new(1, Half),
        (2, 3) => RingSpec::whole(2),
        (2, 4) => RingSpec::new(2, Half),
        (2, 5) => RingSpec::whole(3),
        (2, _) => RingSpec::new(3, Half),
        (3, 0..=2) => RingSpec::whole(1),
        (3, 3) => RingSpec::new(1, Third),
        (3, 4) => RingSpec::new(1, TwoThirds),
        (3, 5) => RingSpec::whole(2),
        (3, _) => RingSpec::new(2, Third),
        _ => RingSpec::whole(1),
    }
}

/// Node set of the given ring around `node`, center first and the rest in
/// ascending id order.
pub fn ring_neighborhood(mesh: &Mesh, hf: &HalfFacetMap, node: usize, ring: RingSpec) -> Vec<usize> {
    assert!(
        ring.is_legal(mesh.dim()),
        "ring {ring} is not legal in {}D",
        mesh.dim()
    );
    let mut members: HashSet<usize> = HashSet::from([node]);
    let mut frontier = vec![node];
    let mut incident = Vec::new();
    for _ in 0..ring.whole {
        let mut added = Vec::new();
        for &v in &frontier {
            hf.incident_elements(mesh, v, &mut incident);
            for &e in &incident {
                for &w in mesh.elem(e) {
                    if members.insert(w) {
                        added.push(w);
                    }
                }
            }
        }
        frontier = added;
    }

    let threshold = match (mesh.dim(), ring.fraction) {
        (_, Fraction::Zero) => None,
        (2, Fraction::Half) => Some(2),
        (3, Fraction::Third) => Some(3),
        (3, Fraction::TwoThirds) => Some(2),
        _ => unreachable!(),
    };
    if let Some(t) = threshold {
        // Every element with a vertex in the set but not fully inside it
        // touches a node added by the last whole step.
        let mut seen = HashSet::new();
        let mut added = Vec::new();
        for &v in &frontier {
            hf.incident_elements(mesh, v, &mut incident);
            for &e in &incident {
                if !seen.insert(e) {
                    continue;
                }
                let conn = mesh.elem(e);
                let inside = conn.iter().filter(|w| members.contains(w)).count();
                if inside >= t {
                    added.extend(conn.iter().copied().filter(|w| !members.contains(w)));
                }
            }
        }
        members.extend(added);
    }

    let mut rest: Vec<usize> = members.into_iter().filter(|&v| v != node).collect();
    rest.sort_unstable();
    let mut out = Vec::with_capacity(rest.len() + 1);
    out.push(node);
    out.extend(rest);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub center: usize,
    /// Center first, then ascending node id.
    pub nodes: Vec<usize>,
    pub ring_used: RingSpec,
    /// Mean distance from the center to its 1-ring neighbors.
    pub h: f64,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Picks the stencil for a degree-`degree` basis at `node`.
///
/// Growth starts at [`ring_for_degree`] and proceeds by the smallest legal
/// ring increment until the stencil holds at least `ratio * n` nodes, where
/// `n` is the number of monomials. If the whole mesh is exhausted first the
/// stencil is accepted as long as it still has `n` nodes.
pub fn select_stencil(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    node: usize,
    degree: usize,
    ratio: f64,
) -> Result<Stencil> {
    let dim = mesh.dim();
    if !(1..=6).contains(&degree) {
        return Err(Error::Unsupported {
            what: "basis degree",
            value: degree.to_string(),
        });
    }
    if ratio.is_nan() || ratio < 1.0 {
        return Err(Error::Invalid(format!("stencil ratio {ratio} below 1")));
    }
    let n = binomial(degree + dim, dim);
    let target = (ratio * n as f64 - 1e-9).ceil() as usize;
    let mut ring = ring_for_degree(dim, degree);
    let mut nodes = ring_neighborhood(mesh, hf, node, ring);
    let mut last_whole_size = 0;
    while nodes.len() < target {
        if ring.fraction == Fraction::Zero {
            if nodes.len() == last_whole_size {
                break;
            }
            last_whole_size = nodes.len();
        }
        ring = ring.next(dim);
        nodes = ring_neighborhood(mesh, hf, node, ring);
    }
    if nodes.len() < n {
        return Err(Error::StencilTooSmall {
            node,
            degree,
            needed: n,
            available: nodes.len(),
        });
    }
    if nodes.len() == n {
        log::warn!(
            "stencil of node {node} has exactly {n} nodes for degree {degree}; \
             the least-squares system is square"
        );
    }

    let one_ring = ring_neighborhood(mesh, hf, node, RingSpec::whole(1));
    let c = mesh.coord(node);
    let h = one_ring[1..]
        .iter()
        .map(|&v| dist(c, mesh.coord(v)))
        .sum::<f64>()
        / (one_ring.len() - 1).max(1) as f64;

    Ok(Stencil {
        center: node,
        nodes,
        ring_used: ring,
        h,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
