use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CsrMatrix, DenseLu};

const SEED: u64 = 0x00c0_ffee;

/// Solves with `A` and `A^T`, used to reach the small end of the spectrum.
pub trait SolveOperator {
    fn solve(&self, b: &[f64]) -> Vec<f64>;
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64>;
}

impl SolveOperator for DenseLu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        DenseLu::solve(self, b)
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        DenseLu::solve_transpose(self, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondEstimate {
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// `sigma_max / sigma_min`; never larger than the true 2-norm condition
    /// number up to round-off.
    pub kappa: f64,
}

/// Lower bound on the 2-norm condition number from Lanczos Ritz values.
///
/// `sigma_max` comes from Lanczos on `A^T A`. Without `solve`, `sigma_min`
/// comes from the smallest Ritz value of the same process; with `solve`,
/// from the largest Ritz value of `(A^T A)^{-1}`, which converges much
/// faster. Both Ritz bounds lie inside the true spectrum.
pub fn condition_estimate(a: &CsrMatrix, solve: Option<&dyn SolveOperator>, krylov_dim: usize) -> CondEstimate {
    assert!(a.is_square(), "condition estimate needs a square matrix");
    let n = a.nrows;
    if n == 0 {
        return CondEstimate {
            sigma_max: 0.0,
            sigma_min: 0.0,
            kappa: 1.0,
        };
    }
    let mut tmp = vec![0.0; n];
    let ata = |x: &[f64], y: &mut [f64], tmp: &mut Vec<f64>| {
        a.spmv_into(x, tmp);
        a.spmv_transpose_into(tmp, y);
    };
    let (lo, hi) = lanczos_extremes(n, krylov_dim, |x, y| ata(x, y, &mut tmp));
    let sigma_max = hi.max(0.0).sqrt();
    let sigma_min = match solve {
        Some(s) => {
            let (_, inv_hi) = lanczos_extremes(n, krylov_dim, |x, y| {
                let t = s.solve_transpose(x);
                y.copy_from_slice(&s.solve(&t));
            });
            if inv_hi > 0.0 {
                1.0 / inv_hi.sqrt()
            } else {
                0.0
            }
        }
        None => lo.max(0.0).sqrt(),
    };
    let kappa = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
    CondEstimate {
        sigma_max,
        sigma_min,
        kappa,
    }
}

/// Extremal Ritz values of a symmetric operator after at most `k` Lanczos
/// steps with full reorthogonalization.
fn lanczos_extremes<F>(n: usize, k: usize, mut op: F) -> (f64, f64)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let k = k.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nq = norm(&q);
    q.iter_mut().for_each(|v| *v /= nq);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    let mut w = vec![0.0; n];
    for j in 0..k {
        op(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
            }
        }
        let b = norm(&w);
        let scale = alpha.iter().chain(&beta).fold(0.0f64, |m, v| m.max(v.abs()));
        if j + 1 == k || b <= 1e-12 * scale {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|v| v / b).collect());
    }
    tridiagonal_extremes(&alpha, &beta)
}

/// Smallest and largest eigenvalue of the symmetric tridiagonal matrix with
/// diagonal `a` and off-diagonal `b`, by Sturm-sequence bisection.
fn tridiagonal_extremes(a: &[f64], b: &[f64]) -> (f64, f64) {
    let m = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = b.get(i).map_or(0.0, |v| v.abs()) + if i > 0 { b[i - 1].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    // Number of eigenvalues strictly below x.
    let count = |x: f64| -> usize {
        let mut c = 0;
        let mut d = 1.0;
        for i in 0..m {
            let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
            d = a[i] - x - if i > 0 { off / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    let bisect = |target: usize| -> f64 {
        // smallest x with count(x) > target
        let (mut l, mut h) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (l + h);
            if mid <= l || mid >= h {
                break;
            }
            if count(mid) > target {
                h = mid;
            } else {
                l = mid;
            }
        }
        0.5 * (l + h)
    };
    if m == 1 {
        return (a[0], a[0]);
    }
    (bisect(0), bisect(m - 1))
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
