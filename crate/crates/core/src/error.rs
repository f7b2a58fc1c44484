use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-manifold facet with nodes {0:?} has more than two incident elements")]
    NonManifoldFacet(Vec<usize>),

    #[error("perturbation produced an inverted element after {0} resampling attempts")]
    PerturbationFailed(usize),

    #[error("stencil of node {node} has {available} nodes, but degree {degree} needs {needed}")]
    StencilTooSmall {
        node: usize,
        degree: usize,
        needed: usize,
        available: usize,
    },

    #[error("zero column in weighted Vandermonde matrix for monomial {exponent:?}")]
    ZeroColumn { exponent: Vec<u32> },

    #[error("degenerate stencil at node {0}: least-squares rank is zero")]
    DegenerateStencil(usize),

    #[error("degenerate element {0} (zero Jacobian)")]
    DegenerateElement(usize),

    #[error("interior node {0} has an empty row")]
    EmptyRow(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("nonpositive pivot {value:e} in row {row}")]
    NonPositivePivot { row: usize, value: f64 },

    #[error("unsupported {what}: {value}")]
    Unsupported { what: &'static str, value: String },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
