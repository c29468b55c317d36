use thiserror::Error;

/// Errors raised by grid construction, eigensolves, operator algebra and checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("grid is not symmetric about the origin (x_min = {x_min}, x_max = {x_max})")]
    AsymmetricGrid { x_min: f64, x_max: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("tridiagonal eigensolver failed to converge for eigenvalue {index}")]
    ConvergenceFailure { index: usize },

    #[error("near-degenerate eigenvalues at index {index} (gap {gap:e})")]
    Degenerate { index: usize, gap: f64 },

    #[error("truncated spectrum: {have} modes supplied, {need} required")]
    TruncatedSpectrum { have: usize, need: usize },

    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("grading weight {index} has modulus {modulus}, expected 1")]
    NonUnimodularWeight { index: usize, modulus: f64 },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("operator is truncated to {rank} of {n} modes; identity checks need the full basis")]
    TruncatedOperator { rank: usize, n: usize },

    #[error("initial state is not normalized (norm {norm})")]
    UnnormalizedState { norm: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Unwraps stage annotations down to the originating error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerical pipeline rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::ConvergenceFailure { .. } | Error::Degenerate { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
