//! High-order adaptive extended stencil finite elements on linear simplices.
//!
//! Trial spaces are generalized Lagrange polynomials fitted by weighted
//! least squares over an extended node stencil; test functions are the
//! standard piecewise-linear hats. Only linear elements are needed, even on
//! curved domains.

pub mod error;
pub mod glp;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod assembly;
pub mod harness;

pub use error::{Error, Result};
