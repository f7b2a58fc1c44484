//! Generalized Lagrange polynomial (GLP) basis functions.
//!
//! For a stencil of `m` nodes around a center `u0`, the degree-`d` basis is
//! obtained from the weighted, column-scaled least-squares problem
//!
//! ```text
//! min || W (V c_j - e_j) ||_2
//! ```
//!
//! where `V` is the `m x n` Vandermonde matrix of the monomials in local
//! coordinates `u - u0` and `W` holds inverse-distance weights. With the
//! column scaling `S` and `Vt = W V S`, the coefficients of every basis
//! function at once are `C = S Vt^+ W` (`n x m`); the `j`-th basis function
//! is `phi_j(u) = (D P(u))^T C[:, j]`, where `D` carries the Taylor
//! factorials. `Vt^+` is applied through a truncated column-pivoted QR.

mod qr;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::mesh::{Mesh, Stencil};

pub use qr::PivotedQr;

pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_PIVOT_TOL: f64 = 1e-8;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Monomials of total degree at most `degree` in graded lexicographic order
/// (constant first; within a degree, higher powers of earlier coordinates
/// first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    pub dim: usize,
    pub degree: usize,
    pub exponents: Vec<[u32; 3]>,
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!((1..=3).contains(&dim), "dimension {dim}");
        let mut exponents = Vec::with_capacity(binomial(degree + dim, dim));
        for total in 0..=degree as u32 {
            match dim {
                1 => exponents.push([total, 0, 0]),
                2 => {
                    for a in (0..=total).rev() {
                        exponents.push([a, total - a, 0]);
                    }
                }
                _ => {
                    for a in (0..=total).rev() {
                        for b in (0..=total - a).rev() {
                            exponents.push([a, b, total - a - b]);
                        }
                    }
                }
            }
        }
        MonomialBasis {
            dim,
            degree,
            exponents,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn total_degree(&self, j: usize) -> u32 {
        self.exponents[j].iter().sum()
    }

    /// Values of every monomial at `u`.
    pub fn eval(&self, u: &[f64], out: &mut [f64]) {
        let pw = self.powers(u);
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = pw[0][e[0] as usize] * pw[1][e[1] as usize] * pw[2][e[2] as usize];
        }
    }

    /// Gradients of every monomial at `u`; `out[j * dim + k]` is the
    /// derivative of monomial `j` along coordinate `k`.
    pub fn eval_gradient(&self, u: &[f64], out: &mut [f64]) {
        let pw = self.powers(u);
        let dim = self.dim;
        for (j, e) in self.exponents.iter().enumerate() {
            for k in 0..dim {
                let mut g = 0.0;
                if e[k] > 0 {
                    g = e[k] as f64;
                    for (l, &a) in e.iter().enumerate() {
                        let p = if l == k { a - 1 } else { a };
                        g *= pw[l][p as usize];
                    }
                }
                out[j * dim + k] = g;
            }
        }
    }

    fn powers(&self, u: &[f64]) -> [Vec<f64>; 3] {
        let d = self.degree;
        std::array::from_fn(|k| {
            let x = if k < self.dim { u[k] } else { 0.0 };
            let mut p = vec![1.0; d + 1];
            for i in 1..=d {
                p[i] = p[i - 1] * x;
            }
            p
        })
    }
}

pub fn monomials(dim: usize, degree: usize) -> MonomialBasis {
    MonomialBasis::new(dim, degree)
}

/// Taylor factorial factors `1 / (a_1! ... a_k!)` for each monomial.
pub fn taylor_scaling(basis: &MonomialBasis) -> Vec<f64> {
    let fact = |a: u32| (1..=a).map(f64::from).product::<f64>();
    basis
        .exponents
        .iter()
        .map(|e| 1.0 / (fact(e[0]) * fact(e[1]) * fact(e[2])))
        .collect()
}

/// Stencil nodes in coordinates local to the center (row 0 is the center).
#[derive(Debug, Clone, PartialEq)]
pub struct StencilFrame {
    pub dim: usize,
    pub center: [f64; 3],
    pub local: Vec<[f64; 3]>,
    pub h: f64,
}

impl StencilFrame {
    pub fn new(mesh: &Mesh, stencil: &Stencil) -> Self {
        let center = mesh.point(stencil.center);
        let local = stencil
            .nodes
            .iter()
            .map(|&v| {
                let p = mesh.point(v);
                [p[0] - center[0], p[1] - center[1], p[2] - center[2]]
            })
            .collect();
        StencilFrame {
            dim: mesh.dim(),
            center,
            local,
            h: stencil.h,
        }
    }

    /// Frame from explicit local coordinates (`dim` values per point).
    pub fn from_local(dim: usize, points: &[&[f64]], h: f64) -> Self {
        let local = points
            .iter()
            .map(|p| {
                let mut q = [0.0; 3];
                q[..dim].copy_from_slice(&p[..dim]);
                q
            })
            .collect();
        StencilFrame {
            dim,
            center: [0.0; 3],
            local,
            h,
        }
    }

    pub fn len(&self) -> usize {
        self.local.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local.is_empty()
    }

    /// Global point expressed in this frame.
    pub fn to_local(&self, x: &[f64]) -> [f64; 3] {
        let mut u = [0.0; 3];
        for k in 0..self.dim {
            u[k] = x[k] - self.center[k];
        }
        u
    }
}

pub fn vandermonde(frame: &StencilFrame, basis: &MonomialBasis) -> DenseMatrix {
    assert_eq!(frame.dim, basis.dim);
    let mut v = DenseMatrix::zeros(frame.len(), basis.len());
    let mut row = vec![0.0; basis.len()];
    for (i, u) in frame.local.iter().enumerate() {
        basis.eval(u, &mut row);
        for (j, &x) in row.iter().enumerate() {
            v[(i, j)] = x;
        }
    }
    v
}

/// `w_i = (|u_i| / h + eps)^-1`.
pub fn wls_weights(frame: &StencilFrame, eps: f64) -> Vec<f64> {
    assert!(frame.h > 0.0, "characteristic length must be positive");
    frame
        .local
        .iter()
        .map(|u| {
            let r = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            1.0 / (r / frame.h + eps)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnNorm {
    #[default]
    Two,
    Inf,
}

fn column_norm(a: &DenseMatrix, j: usize, norm: ColumnNorm) -> f64 {
    let col = (0..a.nrows()).map(|i| a[(i, j)]);
    match norm {
        ColumnNorm::Two => col.map(|x| x * x).sum::<f64>().sqrt(),
        ColumnNorm::Inf => col.fold(0.0f64, |acc, x| acc.max(x.abs())),
    }
}

/// Reciprocal column norms of `wv`. `basis` only names a zero column.
pub fn column_scaling(wv: &DenseMatrix, norm: ColumnNorm, basis: &MonomialBasis) -> Result<Vec<f64>> {
    (0..wv.ncols())
        .map(|j| {
            let nrm = column_norm(wv, j, norm);
            if nrm == 0.0 {
                Err(Error::ZeroColumn {
                    exponent: basis
                        .exponents
                        .get(j)
                        .map_or_else(Vec::new, |e| e[..basis.dim].to_vec()),
                })
            } else {
                Ok(1.0 / nrm)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlpOptions {
    pub eps: f64,
    pub pivot_tol: f64,
    pub norm: ColumnNorm,
}

impl Default for GlpOptions {
    fn default() -> Self {
        GlpOptions {
            eps: DEFAULT_EPS,
            pivot_tol: DEFAULT_PIVOT_TOL,
            norm: ColumnNorm::Two,
        }
    }
}

/// The weighted, scaled least-squares system of one stencil.
#[derive(Debug, Clone)]
pub struct WlsSystem {
    pub v: DenseMatrix,
    pub w: Vec<f64>,
    pub s: Vec<f64>,
    pub vt: DenseMatrix,
}

impl WlsSystem {
    pub fn build(frame: &StencilFrame, basis: &MonomialBasis, opts: &GlpOptions) -> Self {
        let v = vandermonde(frame, basis);
        let w = wls_weights(frame, opts.eps);
        let mut wv = v.clone();
        for i in 0..wv.nrows() {
            for j in 0..wv.ncols() {
                wv[(i, j)] *= w[i];
            }
        }
        // Zero columns (e.g. a collinear stencil in 2D) keep unit scale and
        // are removed by pivot truncation.
        let s: Vec<f64> = (0..wv.ncols())
            .map(|j| {
                let nrm = column_norm(&wv, j, opts.norm);
                if nrm == 0.0 {
                    1.0
                } else {
                    1.0 / nrm
                }
            })
            .collect();
        for i in 0..wv.nrows() {
            for j in 0..wv.ncols() {
                wv[(i, j)] *= s[j];
            }
        }
        WlsSystem { v, w, s, vt: wv }
    }
}

#[derive(Debug, Clone)]
pub struct GlpBasis {
    /// `n x m`; column `j` holds the Taylor coefficients of `phi_j`.
    pub coeffs: DenseMatrix,
    pub rank_used: usize,
    pub frame: StencilFrame,
    pub scaling: Vec<f64>,
    pub monomials: MonomialBasis,
    /// Monomials that survived pivot truncation.
    pub kept: Vec<bool>,
}

impl GlpBasis {
    pub fn degree(&self) -> usize {
        self.monomials.degree
    }

    pub fn dim(&self) -> usize {
        self.monomials.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.ncols() == 0
    }

    /// Largest `D` such that every monomial of total degree `<= D` was kept.
    pub fn effective_degree(&self) -> Option<usize> {
        let mut eff = None;
        for d in 0..=self.monomials.degree as u32 {
            let all = self
                .monomials
                .exponents
                .iter()
                .zip(&self.kept)
                .filter(|(e, _)| e.iter().sum::<u32>() == d)
                .all(|(_, &k)| k);
            if !all {
                break;
            }
            eff = Some(d as usize);
        }
        eff
    }

    /// Row `i` of the result is the weight of monomial `i` in every basis
    /// function, i.e. `D_i * C[i, :]`.
    fn scaled_row(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        let d = self.scaling[i];
        self.coeffs.row(i).iter().map(move |c| d * c)
    }

    /// Values of all basis functions at a point in local coordinates.
    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        let n = self.monomials.len();
        let mut p = vec![0.0; n];
        self.monomials.eval(u, &mut p);
        let mut out = vec![0.0; self.len()];
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.scaled_row(i)) {
                *o += pi * c;
            }
        }
        out
    }

    /// Gradients of all basis functions; `out[j * dim + k]`.
    pub fn eval_gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.monomials.len();
        let dim = self.dim();
        let mut g = vec![0.0; n * dim];
        self.monomials.eval_gradient(u, &mut g);
        let mut out = vec![0.0; self.len() * dim];
        for i in 0..n {
            for k in 0..dim {
                let gik = g[i * dim + k];
                if gik == 0.0 {
                    continue;
                }
                for (j, c) in self.scaled_row(i).enumerate() {
                    out[j * dim + k] += gik * c;
                }
            }
        }
        out
    }

    /// Contracts a per-monomial vector with the basis: `sum_i y_i D_i C[i, j]`
    /// for each `j`.
    pub fn contract(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.scaled_row(i)) {
                *o += yi * c;
            }
        }
        out
    }
}

/// Builds the degree-`degree` GLP basis over a stencil frame. `node` is
/// only used to label a degenerate stencil.
pub fn solve_glp(frame: &StencilFrame, degree: usize, opts: &GlpOptions, node: usize) -> Result<GlpBasis> {
    if frame.is_empty() {
        return Err(Error::DegenerateStencil(node));
    }
    let monomials = MonomialBasis::new(frame.dim, degree);
    let sys = WlsSystem::build(frame, &monomials, opts);
    solve_system(frame, monomials, &sys, opts.pivot_tol, node)
}

/// Same as [`solve_glp`] but also returns the least-squares system.
pub fn solve_glp_with_system(
    frame: &StencilFrame,
    degree: usize,
    opts: &GlpOptions,
    node: usize,
) -> Result<(GlpBasis, WlsSystem)> {
    if frame.is_empty() {
        return Err(Error::DegenerateStencil(node));
    }
    let monomials = MonomialBasis::new(frame.dim, degree);
    let sys = WlsSystem::build(frame, &monomials, opts);
    let basis = solve_system(frame, monomials, &sys, opts.pivot_tol, node)?;
    Ok((basis, sys))
}

fn solve_system(
    frame: &StencilFrame,
    monomials: MonomialBasis,
    sys: &WlsSystem,
    pivot_tol: f64,
    node: usize,
) -> Result<GlpBasis> {
    let m = frame.len();
    let n = monomials.len();
    if m == 0 {
        return Err(Error::DegenerateStencil(node));
    }
    let mut a = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            a[j * m + i] = sys.vt[(i, j)];
        }
    }
    let qr = PivotedQr::factor(m, n, a, pivot_tol);
    if qr.rank == 0 {
        return Err(Error::DegenerateStencil(node));
    }
    let pinv = qr.pseudo_inverse();
    let scaling = taylor_scaling(&monomials);
    // V holds plain monomials, so the fitted coefficients are divided by D
    // to obtain Taylor coefficients.
    let mut coeffs = DenseMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            coeffs[(i, j)] = sys.s[i] * pinv[i * m + j] * sys.w[j] / scaling[i];
        }
    }
    let mut kept = vec![false; n];
    for &p in &qr.perm[..qr.rank] {
        kept[p] = true;
    }
    Ok(GlpBasis {
        coeffs,
        rank_used: qr.rank,
        frame: frame.clone(),
        scaling,
        monomials,
        kept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_order_2d() {
        let b = monomials(2, 2);
        let e: Vec<[u32; 2]> = b.exponents.iter().map(|e| [e[0], e[1]]).collect();
        assert_eq!(e, vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]);
    }

    #[test]
    fn monomial_counts() {
        for dim in 1..=3 {
            for deg in 0..=6 {
                let b = monomials(dim, deg);
                assert_eq!(b.len(), binomial(deg + dim, dim));
                assert_eq!(b.exponents[0], [0, 0, 0]);
                assert!(b.exponents.windows(2).all(|w| {
                    w[0].iter().sum::<u32>() <= w[1].iter().sum::<u32>()
                }));
            }
        }
        assert_eq!(monomials(3, 2).len(), 10);
        assert_eq!(monomials(1, 0).exponents, vec![[0, 0, 0]]);
        assert_eq!(binomial(9, 3), 84);
    }

    #[test]
    fn taylor_factors() {
        assert_eq!(taylor_scaling(&monomials(2, 2)), vec![1.0, 1.0, 1.0, 0.5, 1.0, 0.5]);
        assert_eq!(taylor_scaling(&monomials(1, 3)), vec![1.0, 1.0, 0.5, 1.0 / 6.0]);
        let b = monomials(3, 3);
        let j = b.exponents.iter().position(|e| e == &[1, 1, 1]).unwrap();
        assert_eq!(taylor_scaling(&b)[j], 1.0);
    }

    #[test]
    fn vandermonde_rows() {
        let f = StencilFrame::from_local(2, &[&[0.0, 0.0], &[1.0, 0.0]], 1.0);
        let v = vandermonde(&f, &monomials(2, 2));
        assert_eq!(v.row(0), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(v.row(1), &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let f = StencilFrame::from_local(1, &[&[-1.0], &[0.0], &[1.0]], 1.0);
        let v = vandermonde(&f, &monomials(1, 2));
        assert_eq!(v.row(0), &[1.0, -1.0, 1.0]);
        assert_eq!(v.row(1), &[1.0, 0.0, 0.0]);
        assert_eq!(v.row(2), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn weights() {
        let f = StencilFrame::from_local(2, &[&[0.0, 0.0], &[0.3, 0.4], &[0.6, 0.8]], 0.5);
        let w = wls_weights(&f, 0.01);
        assert!((w[0] - 100.0).abs() < 1e-12);
        assert!((w[1] - 1.0 / 1.01).abs() < 1e-15);
        assert!(w[0] > w[1] && w[1] > w[2]);
    }

    #[test]
    fn scaling_normalizes_columns() {
        let b = monomials(1, 0);
        let m = DenseMatrix::from_rows(&[vec![3.0], vec![4.0]]);
        assert_eq!(column_scaling(&m, ColumnNorm::Two, &b).unwrap(), vec![0.2]);
        assert_eq!(column_scaling(&m, ColumnNorm::Inf, &b).unwrap(), vec![0.25]);
        let z = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]);
        let err = column_scaling(&z, ColumnNorm::Two, &monomials(1, 1)).unwrap_err();
        assert!(matches!(err, Error::ZeroColumn { ref exponent } if exponent == &vec![1]));
    }

    #[test]
    fn identity_scaling_for_unit_columns() {
        let m = DenseMatrix::from_rows(&[vec![0.6, 0.0], vec![0.8, 1.0]]);
        let s = column_scaling(&m, ColumnNorm::Two, &monomials(1, 1)).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn square_system_is_lagrange_interpolation() {
        let f = StencilFrame::from_local(1, &[&[0.0], &[-0.7], &[1.1]], 0.9);
        let b = solve_glp(&f, 2, &GlpOptions::default(), 0).unwrap();
        for (i, u) in f.local.iter().enumerate() {
            let vals = b.eval(u);
            for (j, v) in vals.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-13, "{i} {j} {v}");
            }
        }
        let at_center = b.eval(&[0.0]);
        assert!((at_center[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn collinear_stencil_is_truncated() {
        for dir in [[1.0, 0.0], [0.6, 0.8]] {
            let pts: Vec<[f64; 2]> = (0..8)
                .map(|i| {
                    let t = i as f64 * 0.1 - 0.3;
                    [t * dir[0], t * dir[1]]
                })
                .collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..]).collect();
            let f = StencilFrame::from_local(2, &refs, 0.1);
            let b = solve_glp(&f, 2, &GlpOptions::default(), 0).unwrap();
            assert_eq!(b.rank_used, 3);
            assert_eq!(b.effective_degree(), Some(0));
            let s: f64 = b.eval(&[0.05, 0.2]).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            // quadratics along the line are still reproduced
            let u = [0.15 * dir[0], 0.15 * dir[1]];
            let vals = b.eval(&u);
            let t2: f64 = pts
                .iter()
                .zip(&vals)
                .map(|(p, v)| (p[0] * p[0] + p[1] * p[1]) * v)
                .sum();
            assert!((t2 - 0.15 * 0.15).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_stencil() {
        let f = StencilFrame::from_local(2, &[], 1.0);
        assert!(matches!(
            solve_glp(&f, 2, &GlpOptions::default(), 7),
            Err(Error::DegenerateStencil(7))
        ));
    }
}
