use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {context}: {detail}")]
    Shape {
        context: &'static str,
        detail: String,
    },

    #[error(
        "degenerate spectrum: sigma[{i}] and sigma[{j}] coincide or vanish; \
         switch to cluster mode or deflate"
    )]
    DegenerateSpectrum { i: usize, j: usize },

    #[error("singular values must be sorted in decreasing order (index {0})")]
    Unsorted(usize),

    #[error("invalid cluster partition: {0}")]
    InvalidPartition(String),

    #[error("no cluster partition satisfies both gap conditions: {0}")]
    NoValidPartition(String),

    #[error("Stiefel defect {defect:.3e} is outside the convergence region of the series")]
    SeriesDivergence { defect: f64 },

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("certification failed: epsilon = {epsilon:.4e} > u0 = {u0}")]
    CertificationFailed { epsilon: f64, u0: f64 },

    #[error(
        "divergence guard: epsilon failed to halve at iterations {iteration} and {}",
        iteration + 1
    )]
    Divergence { iteration: usize },

    #[error("deflation quantity e = {0:.4e} exceeds 1")]
    DeflationPrecondition(f64),

    #[error("deflation is only defined for square triplets (m = n = l = q)")]
    RectangularDeflation,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape(context: &'static str, detail: impl Into<String>) -> Error {
    Error::Shape {
        context,
        detail: detail.into(),
    }
}
