use std::fmt;
use std::str::FromStr;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Approximate inverse `z = M^{-1} r`.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    None,
    Jacobi,
    /// One forward sweep, `(D + L) z = r`.
    GaussSeidel,
    /// Forward then backward sweep; symmetric for symmetric `A`.
    SymmetricGaussSeidel,
    Ilu0,
    Ic0,
}

impl FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "none" => PrecondKind::None,
            "jacobi" => PrecondKind::Jacobi,
            "gauss_seidel" | "gs" => PrecondKind::GaussSeidel,
            "sgs" | "symmetric_gauss_seidel" => PrecondKind::SymmetricGaussSeidel,
            "ilu0" | "ilu" => PrecondKind::Ilu0,
            "ic0" | "ic" => PrecondKind::Ic0,
            _ => {
                return Err(Error::Unsupported {
                    what: "preconditioner",
                    value: s.to_string(),
                })
            }
        })
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecondKind::None => "none",
            PrecondKind::Jacobi => "jacobi",
            PrecondKind::GaussSeidel => "gauss_seidel",
            PrecondKind::SymmetricGaussSeidel => "sgs",
            PrecondKind::Ilu0 => "ilu0",
            PrecondKind::Ic0 => "ic0",
        })
    }
}

/// A built preconditioner of any supported kind.
#[derive(Debug, Clone)]
pub enum Precond {
    Identity,
    Jacobi(Vec<f64>),
    GaussSeidel(Sweep),
    SymmetricGaussSeidel(Sweep),
    Ilu0(Ilu0),
    Ic0(Ic0),
}

impl Precond {
    pub fn build(kind: PrecondKind, a: &CsrMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows,
                got: a.ncols,
            });
        }
        Ok(match kind {
            PrecondKind::None => Precond::Identity,
            PrecondKind::Jacobi => {
                let d = a.diagonal();
                let mut inv = Vec::with_capacity(d.len());
                for (i, v) in d.into_iter().enumerate() {
                    if v == 0.0 || !v.is_finite() {
                        return Err(Error::NonPositivePivot { row: i, value: v });
                    }
                    inv.push(1.0 / v);
                }
                Precond::Jacobi(inv)
            }
            PrecondKind::GaussSeidel => Precond::GaussSeidel(Sweep::new(a)?),
            PrecondKind::SymmetricGaussSeidel => Precond::SymmetricGaussSeidel(Sweep::new(a)?),
            PrecondKind::Ilu0 => Precond::Ilu0(Ilu0::new(a)?),
            PrecondKind::Ic0 => Precond::Ic0(Ic0::new(a)?),
        })
    }
}

impl Preconditioner for Precond {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Precond::Identity => z.copy_from_slice(r),
            Precond::Jacobi(inv) => {
                for ((zi, ri), d) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * d;
                }
            }
            Precond::GaussSeidel(s) => s.forward(r, z),
            Precond::SymmetricGaussSeidel(s) => s.symmetric(r, z),
            Precond::Ilu0(f) => f.apply(r, z),
            Precond::Ic0(f) => f.apply(r, z),
        }
    }
}

/// Gauss-Seidel sweeps; sequential by construction.
#[derive(Debug, Clone)]
pub struct Sweep {
    a: CsrMatrix,
    diag: Vec<f64>,
}

impl Sweep {
    fn new(a: &CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if let Some((i, &v)) = diag.iter().enumerate().find(|(_, v)| **v == 0.0 || !v.is_finite()) {
            return Err(Error::NonPositivePivot { row: i, value: v });
        }
        Ok(Sweep { a: a.clone(), diag })
    }

    fn forward(&self, r: &[f64], z: &mut [f64]) {
        for i in 0..self.a.nrows {
            let mut s = r[i];
            for (j, v) in self.a.row(i) {
                if j < i {
                    s -= v * z[j];
                }
            }
            z[i] = s / self.diag[i];
        }
    }

    /// `(D + U)^{-1} D (D + L)^{-1} r`.
    fn symmetric(&self, r: &[f64], z: &mut [f64]) {
        self.forward(r, z);
        for i in 0..z.len() {
            z[i] *= self.diag[i];
        }
        for i in (0..self.a.nrows).rev() {
            let mut s = z[i];
            for (j, v) in self.a.row(i) {
                if j > i {
                    s -= v * z[j];
                }
            }
            z[i] = s / self.diag[i];
        }
    }
}

/// Zero-fill incomplete LU; unit lower `L` and `U` share the pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows;
        let mut lu = a.clone();
        let diag_pos = diagonal_positions(&lu)?;
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for k in start..end {
                pos[lu.col_idx[k]] = k;
            }
            for kk in start..end {
                let k = lu.col_idx[kk];
                if k >= i {
                    break;
                }
                let pivot = lu.values[diag_pos[k]];
                let f = lu.values[kk] / pivot;
                lu.values[kk] = f;
                for t in diag_pos[k] + 1..lu.row_ptr[k + 1] {
                    let j = lu.col_idx[t];
                    let p = pos[j];
                    if p != usize::MAX {
                        lu.values[p] -= f * lu.values[t];
                    }
                }
            }
            let d = lu.values[diag_pos[i]];
            if d == 0.0 || !d.is_finite() {
                return Err(Error::NonPositivePivot { row: i, value: d });
            }
            for k in start..end {
                pos[lu.col_idx[k]] = usize::MAX;
            }
        }
        Ok(Ilu0 { lu, diag_pos })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.nrows {
            let mut s = r[i];
            for k in lu.row_ptr[i]..self.diag_pos[i] {
                s -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = s;
        }
        for i in (0..lu.nrows).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.values[k] * z[lu.col_idx[k]];
            }
            z[i] = s / lu.values[self.diag_pos[i]];
        }
    }
}

/// Zero-fill incomplete Cholesky `A ~ L L^T` on the lower pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ic0 {
    /// Lower triangle, diagonal last in each row.
    l: CsrMatrix,
}

impl Ic0 {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows;
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| a.row(i).filter(|&(j, _)| j <= i).collect())
            .collect();
        let mut l = CsrMatrix::from_rows(n, rows)?;
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (l.row_ptr[i], l.row_ptr[i + 1]);
            if end == start || l.col_idx[end - 1] != i {
                return Err(Error::NonPositivePivot { row: i, value: 0.0 });
            }
            for k in start..end {
                pos[l.col_idx[k]] = k;
            }
            for kk in start..end - 1 {
                let k = l.col_idx[kk];
                // l_ik = (a_ik - sum_{j<k} l_ij l_kj) / l_kk
                let mut s = l.values[kk];
                let kend = l.row_ptr[k + 1] - 1;
                for t in l.row_ptr[k]..kend {
                    let p = pos[l.col_idx[t]];
                    if p != usize::MAX && p < kk {
                        s -= l.values[p] * l.values[t];
                    }
                }
                l.values[kk] = s / l.values[kend];
            }
            let mut d = l.values[end - 1];
            for k in start..end - 1 {
                d -= l.values[k] * l.values[k];
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NonPositivePivot { row: i, value: d });
            }
            l.values[end - 1] = d.sqrt();
            for k in start..end {
                pos[l.col_idx[k]] = usize::MAX;
            }
        }
        Ok(Ic0 { l })
    }

    /// The factor `L` (lower triangular, CSR).
    pub fn factor(&self) -> &CsrMatrix {
        &self.l
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let l = &self.l;
        for i in 0..l.nrows {
            let end = l.row_ptr[i + 1] - 1;
            let mut s = r[i];
            for k in l.row_ptr[i]..end {
                s -= l.values[k] * z[l.col_idx[k]];
            }
            z[i] = s / l.values[end];
        }
        for i in (0..l.nrows).rev() {
            let end = l.row_ptr[i + 1] - 1;
            z[i] /= l.values[end];
            let zi = z[i];
            for k in l.row_ptr[i]..end {
                z[l.col_idx[k]] -= l.values[k] * zi;
            }
        }
    }
}

fn diagonal_positions(a: &CsrMatrix) -> Result<Vec<usize>> {
    (0..a.nrows)
        .map(|i| {
            let r = a.row_ptr[i]..a.row_ptr[i + 1];
            a.col_idx[r.clone()]
                .binary_search(&i)
                .map(|k| r.start + k)
                .map_err(|_| Error::NonPositivePivot { row: i, value: 0.0 })
        })
        .collect()
}
