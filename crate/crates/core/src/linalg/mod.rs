//! Sparse kernels, Krylov solvers, incomplete factorizations and condition
//! estimation.

mod condest;
mod csr;
mod dense;
mod krylov;
mod precond;

pub use condest::{condition_estimate, CondEstimate, SolveOperator};
pub use csr::CsrMatrix;
pub use dense::{DenseLu, DenseMatrix};
pub use krylov::{cg, gmres, SolverOptions, SolverReport};
pub use precond::{Ic0, Ilu0, Precond, PrecondKind, Preconditioner, Sweep};

/// `y = A x`; errors on a length mismatch.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> crate::Result<Vec<f64>> {
    a.spmv(x)
}
