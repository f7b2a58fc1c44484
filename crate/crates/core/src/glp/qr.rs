//! Householder QR with column pivoting, truncated at a relative pivot
//! threshold.

/// Column-pivoted QR of an `m x n` matrix stored column-major.
pub struct PivotedQr {
    m: usize,
    n: usize,
    /// R on and above the diagonal, Householder vectors below it.
    a: Vec<f64>,
    tau: Vec<f64>,
    /// `perm[k]` is the original column moved to position `k`.
    pub perm: Vec<usize>,
    pub rank: usize,
}

impl PivotedQr {
    /// Factors `a` (column-major, `m` rows) and truncates the rank at the
    /// first pivot with `|r_kk| < tol * |r_00|`.
    pub fn factor(m: usize, n: usize, mut a: Vec<f64>, tol: f64) -> Self {
        assert_eq!(a.len(), m * n);
        let steps = m.min(n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut tau = vec![0.0; steps];
        let col_norm = |a: &[f64], j: usize, from: usize| -> f64 {
            a[j * m + from..(j + 1) * m]
                .iter()
                .map(|x| x * x)
                .sum::<f64>()
                .sqrt()
        };
        let mut norms: Vec<f64> = (0..n).map(|j| col_norm(&a, j, 0)).collect();
        let mut ref_norms = norms.clone();
        let mut rank = 0;
        let mut r00 = 0.0f64;

        for k in 0..steps {
            let p = (k..n)
                .max_by(|&i, &j| norms[i].total_cmp(&norms[j]))
                .unwrap();
            if p != k {
                for i in 0..m {
                    a.swap(k * m + i, p * m + i);
                }
                perm.swap(k, p);
                norms.swap(k, p);
                ref_norms.swap(k, p);
            }

            // Reflector annihilating a[k+1.., k].
            let x_norm = col_norm(&a, k, k);
            if k == 0 {
                r00 = x_norm;
            }
            if x_norm == 0.0 || x_norm < tol * r00 {
                break;
            }
            let alpha = a[k * m + k];
            let beta = if alpha >= 0.0 { -x_norm } else { x_norm };
            let v0 = alpha - beta;
            for i in k + 1..m {
                a[k * m + i] /= v0;
            }
            tau[k] = (beta - alpha) / beta;
            a[k * m + k] = beta;
            rank = k + 1;

            for j in k + 1..n {
                let mut s = a[j * m + k];
                for i in k + 1..m {
                    s += a[k * m + i] * a[j * m + i];
                }
                s *= tau[k];
                a[j * m + k] -= s;
                for i in k + 1..m {
                    a[j * m + i] -= s * a[k * m + i];
                }
                // Norm downdate, recomputed when cancellation sets in.
                if norms[j] != 0.0 {
                    let t = (a[j * m + k] / norms[j]).abs();
                    let t = (1.0 - t * t).max(0.0);
                    let ratio = norms[j] / ref_norms[j];
                    if t * ratio * ratio <= f64::EPSILON.sqrt() {
                        norms[j] = col_norm(&a, j, k + 1);
                        ref_norms[j] = norms[j];
                    } else {
                        norms[j] *= t.sqrt();
                    }
                }
            }
        }

        PivotedQr {
            m,
            n,
            a,
            tau,
            perm,
            rank,
        }
    }

    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.rank).map(|k| self.a[k * self.m + k]).collect()
    }

    /// Basic solution operator of the truncated factorization: the `n x m`
    /// matrix `X` (row-major) with rows for dropped columns set to zero and
    /// `X[perm[0..r], :] = R11^{-1} Q1^T`.
    pub fn pseudo_inverse(&self) -> Vec<f64> {
        let (m, n, r) = (self.m, self.n, self.rank);
        // Q1 = H_0 ... H_{r-1} [I; 0], accumulated backwards.
        let mut q = vec![0.0; m * r]; // column-major m x r
        for k in 0..r {
            q[k * m + k] = 1.0;
        }
        for k in (0..r).rev() {
            for j in k..r {
                let mut s = q[j * m + k];
                for i in k + 1..m {
                    s += self.a[k * m + i] * q[j * m + i];
                }
                s *= self.tau[k];
                q[j * m + k] -= s;
                for i in k + 1..m {
                    q[j * m + i] -= s * self.a[k * m + i];
                }
            }
        }
        // Y = R11^{-1} Q1^T, back substitution one column of Q1^T at a time.
        let mut x = vec![0.0; n * m];
        let mut y = vec![0.0; r];
        for col in 0..m {
            for k in (0..r).rev() {
                let mut s = q[k * m + col];
                for j in k + 1..r {
                    s -= self.a[j * m + k] * y[j];
                }
                y[k] = s / self.a[k * m + k];
            }
            for k in 0..r {
                x[self.perm[k] * m + col] = y[k];
            }
        }
        x
    }
}
