//! Linear systems for `-lap U + c . grad U = rho` with strong Dirichlet data.
//!
//! AES-FEM uses the piecewise-linear hat `psi_i` of every interior node as
//! test function and node `i`'s own GLP basis as trial space, so row `i` is
//! `a_ij = int grad psi_i . grad phi_j + psi_i c . grad phi_j` over the
//! 1-ring of `i`. Note the sign: `A` is the positive (strong-form) operator.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::glp::{solve_glp, GlpBasis, GlpOptions, StencilFrame};
use crate::linalg::CsrMatrix;
use crate::mesh::{select_stencil, HalfFacetMap, Mesh, Stencil, DEFAULT_STENCIL_RATIO};
use crate::quadrature::{simplex_rule, QuadratureRule, SimplexMap, MAX_EXACTNESS};

pub type ScalarField = Arc<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeKind {
    Poisson,
    ConvectionDiffusion,
}

#[derive(Clone)]
pub struct PdeSpec {
    pub kind: PdeKind,
    /// Zero for Poisson.
    pub velocity: [f64; 3],
    pub rho: ScalarField,
    pub dirichlet: ScalarField,
}

impl PdeSpec {
    pub fn poisson(rho: ScalarField, dirichlet: ScalarField) -> Self {
        PdeSpec {
            kind: PdeKind::Poisson,
            velocity: [0.0; 3],
            rho,
            dirichlet,
        }
    }

    pub fn convection_diffusion(velocity: [f64; 3], rho: ScalarField, dirichlet: ScalarField) -> Self {
        PdeSpec {
            kind: PdeKind::ConvectionDiffusion,
            velocity,
            rho,
            dirichlet,
        }
    }

    pub fn velocity(&self) -> Option<[f64; 3]> {
        match self.kind {
            PdeKind::Poisson => None,
            PdeKind::ConvectionDiffusion => Some(self.velocity),
        }
    }
}

impl std::fmt::Debug for PdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdeSpec")
            .field("kind", &self.kind)
            .field("velocity", &self.velocity)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub stencil_ratio: f64,
    pub glp: GlpOptions,
    /// Defaults to `max(degree + 1, 2)`.
    pub quad_exactness: Option<usize>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            stencil_ratio: DEFAULT_STENCIL_RATIO,
            glp: GlpOptions::default(),
            quad_exactness: None,
        }
    }
}

impl AssemblyOptions {
    pub fn exactness(&self, degree: usize) -> usize {
        self.quad_exactness
            .unwrap_or((degree + 1).max(2))
            .clamp(1, MAX_EXACTNESS)
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub dof_of_node: Vec<Option<usize>>,
    pub node_of_dof: Vec<usize>,
    /// `g(u_j)` on boundary nodes, zero elsewhere.
    pub dirichlet_values: Vec<f64>,
    /// Rows before Dirichlet elimination, over global node ids.
    pub full_rows: Vec<Vec<(usize, f64)>>,
    /// Load vector before Dirichlet elimination.
    pub load: Vec<f64>,
    /// `int psi_i` for each dof.
    pub test_mass: Vec<f64>,
}

impl LinearSystem {
    pub fn dof_count(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        self.a.write_matrix_market(path)
    }

    /// Restricts a nodal field to the interior dofs.
    pub fn interior_values(&self, field: &[f64]) -> Vec<f64> {
        self.node_of_dof.iter().map(|&v| field[v]).collect()
    }
}

/// Nodal field from interior values plus the Dirichlet data.
pub fn recover_solution(sys: &LinearSystem, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != sys.dof_count() {
        return Err(Error::DimensionMismatch {
            expected: sys.dof_count(),
            got: x.len(),
        });
    }
    let mut u = sys.dirichlet_values.clone();
    for (&v, &xi) in sys.node_of_dof.iter().zip(x) {
        u[v] = xi;
    }
    Ok(u)
}

/// Per-node stencils and GLP bases (interior nodes only).
#[derive(Debug, Clone)]
pub struct BasisCache {
    pub degree: usize,
    pub stencils: Vec<Option<Stencil>>,
    pub bases: Vec<Option<GlpBasis>>,
}

impl BasisCache {
    pub fn build(mesh: &Mesh, hf: &HalfFacetMap, degree: usize, opts: &AssemblyOptions) -> Result<Self> {
        let entries: Vec<Option<(Stencil, GlpBasis)>> = (0..mesh.node_count())
            .into_par_iter()
            .map(|v| {
                if mesh.is_boundary(v) {
                    return Ok(None);
                }
                let s = select_stencil(mesh, hf, v, degree, opts.stencil_ratio)?;
                let frame = StencilFrame::new(mesh, &s);
                let b = solve_glp(&frame, degree, &opts.glp, v)?;
                Ok(Some((s, b)))
            })
            .collect::<Result<_>>()?;
        let (stencils, bases) = entries
            .into_iter()
            .map(|e| match e {
                Some((s, b)) => (Some(s), Some(b)),
                None => (None, None),
            })
            .unzip();
        Ok(BasisCache {
            degree,
            stencils,
            bases,
        })
    }
}

struct Numbering {
    dof_of_node: Vec<Option<usize>>,
    node_of_dof: Vec<usize>,
    dirichlet_values: Vec<f64>,
}

fn numbering(mesh: &Mesh, pde: &PdeSpec) -> Numbering {
    let mut dof_of_node = vec![None; mesh.node_count()];
    let mut node_of_dof = Vec::new();
    let mut dirichlet_values = vec![0.0; mesh.node_count()];
    for v in 0..mesh.node_count() {
        if mesh.is_boundary(v) {
            dirichlet_values[v] = (pde.dirichlet)(&mesh.point(v));
        } else {
            dof_of_node[v] = Some(node_of_dof.len());
            node_of_dof.push(v);
        }
    }
    Numbering {
        dof_of_node,
        node_of_dof,
        dirichlet_values,
    }
}

/// Gradients of the barycentric coordinates of one simplex.
pub fn barycentric_gradients(verts: &[[f64; 3]], dim: usize) -> [[f64; 3]; 4] {
    let mut j = [[0.0; 3]; 3];
    for k in 0..dim {
        for r in 0..dim {
            j[r][k] = verts[k + 1][r] - verts[0][r];
        }
    }
    let inv = invert(&j, dim);
    let mut g = [[0.0; 3]; 4];
    for k in 0..dim {
        for r in 0..dim {
            g[k + 1][r] = inv[k][r];
            g[0][r] -= inv[k][r];
        }
    }
    g
}

fn invert(j: &[[f64; 3]; 3], dim: usize) -> [[f64; 3]; 3] {
    let mut inv = [[0.0; 3]; 3];
    match dim {
        1 => inv[0][0] = 1.0 / j[0][0],
        2 => {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            inv[0][0] = j[1][1] / det;
            inv[0][1] = -j[0][1] / det;
            inv[1][0] = -j[1][0] / det;
            inv[1][1] = j[0][0] / det;
        }
        _ => {
            let det = crate::mesh::det3(j);
            for r in 0..3 {
                for c in 0..3 {
                    let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
                    let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
                    inv[r][c] = (j[r1][c1] * j[r2][c2] - j[r1][c2] * j[r2][c1]) / det;
                }
            }
        }
    }
    inv
}

struct RowResult {
    full: Vec<(usize, f64)>,
    load: f64,
    mass: f64,
}

/// One AES-FEM row: integrates over the 1-ring of `node` with its basis.
fn aesfem_row(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    pde: &PdeSpec,
    node: usize,
    stencil: &Stencil,
    basis: &GlpBasis,
    rule: &QuadratureRule,
) -> Result<RowResult> {
    let dim = mesh.dim();
    let n = basis.monomials.len();
    let mut elems = Vec::new();
    hf.incident_elements(mesh, node, &mut elems);
    let mut y = vec![0.0; n];
    let mut grads = vec![0.0; n * dim];
    let mut load = 0.0;
    let mut mass = 0.0;
    let c = pde.velocity();
    for &e in &elems {
        let map = SimplexMap::new(mesh, e)?;
        let conn = mesh.elem(e);
        let local = conn.iter().position(|&v| v == node).expect("incident element");
        let g = barycentric_gradients(&map.vertices, dim)[local];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let x = map.point(bary);
            let u = basis.frame.to_local(&x);
            let wq = w * map.det;
            let psi = bary[local];
            basis.monomials.eval_gradient(&u[..dim], &mut grads);
            for m in 0..n {
                let gm = &grads[m * dim..(m + 1) * dim];
                let mut t: f64 = (0..dim).map(|k| g[k] * gm[k]).sum();
                if let Some(c) = c {
                    t += psi * (0..dim).map(|k| c[k] * gm[k]).sum::<f64>();
                }
                y[m] += wq * t;
            }
            load += wq * psi * (pde.rho)(&x);
            mass += wq * psi;
        }
    }
    let vals = basis.contract(&y);
    let full = stencil.nodes.iter().copied().zip(vals).collect();
    Ok(RowResult { full, load, mass })
}

fn finish(mesh: &Mesh, num: Numbering, rows: Vec<RowResult>) -> Result<LinearSystem> {
    let mut reduced = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut full_rows = Vec::with_capacity(rows.len());
    let mut load = Vec::with_capacity(rows.len());
    let mut test_mass = Vec::with_capacity(rows.len());
    for (i, r) in rows.into_iter().enumerate() {
        let mut bi = r.load;
        let mut row = Vec::with_capacity(r.full.len());
        for &(j, a) in &r.full {
            match num.dof_of_node[j] {
                Some(d) => row.push((d, a)),
                None => bi -= a * num.dirichlet_values[j],
            }
        }
        if row.iter().all(|&(_, a)| a == 0.0) {
            return Err(Error::EmptyRow(num.node_of_dof[i]));
        }
        reduced.push(row);
        b.push(bi);
        load.push(r.load);
        test_mass.push(r.mass);
        full_rows.push(r.full);
    }
    let a = CsrMatrix::from_rows(num.node_of_dof.len(), reduced)?;
    debug_assert_eq!(num.dof_of_node.len(), mesh.node_count());
    Ok(LinearSystem {
        a,
        b,
        dof_of_node: num.dof_of_node,
        node_of_dof: num.node_of_dof,
        dirichlet_values: num.dirichlet_values,
        full_rows,
        load,
        test_mass,
    })
}

/// Assembles the AES-FEM system of the given degree, returning the basis
/// cache for reuse.
pub fn assemble_aesfem(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    pde: &PdeSpec,
    degree: usize,
    opts: &AssemblyOptions,
) -> Result<(LinearSystem, BasisCache)> {
    let cache = BasisCache::build(mesh, hf, degree, opts)?;
    let sys = assemble_aesfem_with_cache(mesh, hf, pde, &cache, opts)?;
    Ok((sys, cache))
}

pub fn assemble_aesfem_with_cache(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    pde: &PdeSpec,
    cache: &BasisCache,
    opts: &AssemblyOptions,
) -> Result<LinearSystem> {
    let rule = simplex_rule(mesh.dim(), opts.exactness(cache.degree))?;
    let num = numbering(mesh, pde);
    let rows: Vec<RowResult> = num
        .node_of_dof
        .par_iter()
        .map(|&v| {
            let s = cache.stencils[v].as_ref().expect("interior stencil");
            let b = cache.bases[v].as_ref().expect("interior basis");
            aesfem_row(mesh, hf, pde, v, s, b, rule)
        })
        .collect::<Result<_>>()?;
    finish(mesh, num, rows)
}

/// Standard piecewise-linear Galerkin system.
pub fn assemble_fem_p1(mesh: &Mesh, pde: &PdeSpec, quad_exactness: Option<usize>) -> Result<LinearSystem> {
    let dim = mesh.dim();
    let npe = dim + 1;
    let rule = simplex_rule(dim, quad_exactness.unwrap_or(3).clamp(1, MAX_EXACTNESS))?;
    let num = numbering(mesh, pde);
    let mut rows: Vec<RowResult> = (0..num.node_of_dof.len())
        .map(|_| RowResult {
            full: Vec::new(),
            load: 0.0,
            mass: 0.0,
        })
        .collect();
    let c = pde.velocity();
    for e in 0..mesh.elem_count() {
        let map = SimplexMap::new(mesh, e)?;
        let vol = mesh.elem_volume(e);
        let g = barycentric_gradients(&map.vertices, dim);
        let conn = mesh.elem(e);
        let mut f = [0.0; 4];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let r = (pde.rho)(&map.point(bary)) * w * map.det;
            for a in 0..npe {
                f[a] += r * bary[a];
            }
        }
        for a in 0..npe {
            let Some(i) = num.dof_of_node[conn[a]] else {
                continue;
            };
            let row = &mut rows[i];
            for bb in 0..npe {
                let mut k: f64 = (0..dim).map(|r| g[a][r] * g[bb][r]).sum::<f64>() * vol;
                if let Some(c) = c {
                    k += (0..dim).map(|r| c[r] * g[bb][r]).sum::<f64>() * vol / npe as f64;
                }
                row.full.push((conn[bb], k));
            }
            row.load += f[a];
            row.mass += vol / npe as f64;
        }
    }
    for r in &mut rows {
        r.full.sort_by_key(|&(j, _)| j);
        r.full.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
    }
    finish(mesh, num, rows)
}

/// Residual of the discrete equations at the exact nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationResidual {
    /// `|sum_j a_ij U(u_j) - b_i|` per interior node.
    pub values: Vec<f64>,
    /// `values[i] / int psi_i`, the residual per unit test-function mass.
    pub normalized: Vec<f64>,
    pub max: f64,
    pub mean: f64,
    pub normalized_max: f64,
}

/// Evaluates the residual of an assembled system at exact nodal values.
pub fn residual_of_system(mesh: &Mesh, sys: &LinearSystem, exact: &dyn Fn(&[f64; 3]) -> f64) -> TruncationResidual {
    let values: Vec<f64> = sys
        .full_rows
        .iter()
        .zip(&sys.load)
        .map(|(row, b)| {
            let s: f64 = row.iter().map(|&(j, a)| a * exact(&mesh.point(j))).sum();
            (s - b).abs()
        })
        .collect();
    let normalized: Vec<f64> = values.iter().zip(&sys.test_mass).map(|(r, m)| r / m).collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    let mean = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    let normalized_max = normalized.iter().copied().fold(0.0, f64::max);
    TruncationResidual {
        values,
        normalized,
        max,
        mean,
        normalized_max,
    }
}

/// Assembles the AES-FEM system and evaluates its residual at `exact`
/// without solving.
pub fn truncation_residual(
    mesh: &Mesh,
    hf: &HalfFacetMap,
    pde: &PdeSpec,
    degree: usize,
    exact: &dyn Fn(&[f64; 3]) -> f64,
    opts: &AssemblyOptions,
) -> Result<TruncationResidual> {
    let (sys, _) = assemble_aesfem(mesh, hf, pde, degree, opts)?;
    Ok(residual_of_system(mesh, &sys, exact))
}
