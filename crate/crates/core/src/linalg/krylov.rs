use std::time::Instant;

use super::{CsrMatrix, Preconditioner};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// True residual `||b - A x|| / ||b||` of the returned iterate.
    pub final_relative_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
    /// Relative residual estimates, one per iteration.
    pub residual_history: Vec<f64>,
    /// Set when the method broke down (for CG: `p^T A p <= 0`).
    pub breakdown: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 10_000,
            restart: 60,
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check(a: &CsrMatrix, b: &[f64]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows,
            got: a.ncols,
        });
    }
    if b.len() != a.nrows {
        return Err(Error::DimensionMismatch {
            expected: a.nrows,
            got: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("right-hand side is not finite".into()));
    }
    Ok(())
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    a.spmv_into(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

/// Right-preconditioned restarted GMRES with modified Gram-Schmidt and
/// Givens rotations, started from `x = 0`.
pub fn gmres(
    a: &CsrMatrix,
    b: &[f64],
    precond: &dyn Preconditioner,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverReport)> {
    check(a, b)?;
    let start = Instant::now();
    let n = a.nrows;
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    let mut report = SolverReport {
        iterations: 0,
        final_relative_residual: 0.0,
        converged: true,
        wall_time: 0.0,
        residual_history: Vec::new(),
        breakdown: None,
    };
    if bnorm == 0.0 {
        return Ok((x, report));
    }
    let m = opts.restart.max(1);
    let mut r = b.to_vec();
    let mut beta = bnorm;
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    report.converged = false;

    while report.iterations < opts.max_iter {
        v.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.fill(0.0);
        g[0] = beta;
        let mut k = 0;
        let mut happy = false;
        while k < m && report.iterations < opts.max_iter {
            precond.apply(&v[k], &mut z);
            a.spmv_into(&z, &mut w);
            let w0 = norm(&w);
            for i in 0..=k {
                let hik = dot(&w, &v[i]);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / d;
                sn[k] = h[k + 1][k] / d;
            }
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            report.iterations += 1;
            k += 1;
            let est = g[k].abs() / bnorm;
            report.residual_history.push(est);
            if hn <= 1e-14 * w0 {
                happy = true;
                break;
            }
            if est <= opts.tol {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // y = H^{-1} g, then x += M^{-1} V y
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = if h[i][i] == 0.0 { 0.0 } else { (g[i] - s) / h[i][i] };
        }
        w.fill(0.0);
        for (yi, vi) in y.iter().zip(&v) {
            for (wj, vj) in w.iter_mut().zip(vi) {
                *wj += yi * vj;
            }
        }
        precond.apply(&w, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
        beta = true_residual(a, b, &x, &mut r);
        if beta / bnorm <= opts.tol {
            report.converged = true;
            break;
        }
        if happy && k < m {
            // Exact Krylov solution that still misses the tolerance: the
            // preconditioned operator is singular or round-off dominates.
            report.breakdown = Some("stagnation after Arnoldi breakdown".into());
            break;
        }
        if !beta.is_finite() {
            report.breakdown = Some("non-finite residual".into());
            break;
        }
    }
    report.final_relative_residual = beta / bnorm;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Preconditioned conjugate gradients from `x = 0`. The preconditioner must
/// be symmetric positive definite; use symmetric Gauss-Seidel rather than a
/// single forward sweep.
pub fn cg(
    a: &CsrMatrix,
    b: &[f64],
    precond: &dyn Preconditioner,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverReport)> {
    check(a, b)?;
    let start = Instant::now();
    let n = a.nrows;
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    let mut report = SolverReport {
        iterations: 0,
        final_relative_residual: 0.0,
        converged: true,
        wall_time: 0.0,
        residual_history: Vec::new(),
        breakdown: None,
    };
    if bnorm == 0.0 {
        return Ok((x, report));
    }
    report.converged = false;
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rnorm = bnorm;
    let mut replacements = 0;
    while report.iterations < opts.max_iter {
        if rz <= 0.0 || !rz.is_finite() {
            report.breakdown = Some(format!("preconditioner not positive definite (r^T z = {rz:e})"));
            break;
        }
        a.spmv_into(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 || !pq.is_finite() {
            report.breakdown = Some(format!("indefinite matrix (p^T A p = {pq:e})"));
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        report.iterations += 1;
        rnorm = norm(&r);
        report.residual_history.push(rnorm / bnorm);
        if rnorm / bnorm <= opts.tol {
            rnorm = true_residual(a, b, &x, &mut r);
            if rnorm / bnorm <= opts.tol {
                report.converged = true;
                break;
            }
            replacements += 1;
            if replacements > 5 {
                break;
            }
            precond.apply(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if !report.converged {
        rnorm = true_residual(a, b, &x, &mut r);
    }
    report.final_relative_residual = rnorm / bnorm;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((x, report))
}
