use thiserror::Error;

/// Everything that can go wrong between reading a field spec and writing a report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("metric is not positive definite at {point:?}")]
    DegenerateMetric { point: Vec<f64> },

    #[error("magnetic 2-form is degenerate at {point:?} (det B = {det:.3e})")]
    DegenerateField { point: Vec<f64>, det: f64 },

    #[error("inconsistent jet: {what} (residual {residual:.3e})")]
    InconsistentJet { what: String, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degree overflow: result needs degree {needed}, truncation is {bound}")]
    DegreeOverflow { needed: usize, bound: usize },

    #[error("right-hand side has a kernel component of relative size {ratio:.3e}")]
    KernelComponent { ratio: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("flux is not quantized: total flux / 2pi = {flux_quanta}")]
    FluxIntegrality { flux_quanta: f64 },

    #[error("grid too coarse: axis {axis} has {have} points, needs at least {required}")]
    Resolution {
        axis: usize,
        have: usize,
        required: usize,
    },

    #[error("eigensolver did not converge after {iterations} sweeps (worst residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("no spectral gap found below {threshold:.4}: {detail}")]
    NoGap { threshold: f64, detail: String },

    #[error("invariant `{name}` failed with residual {residual:.3e} (tolerance {tol:.1e})")]
    Invariant { name: String, residual: f64, tol: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 2 config, 3 numerical invariant, 4 convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Io(_) | Error::Csv(_) => 2,
            Error::Convergence { .. } | Error::NoGap { .. } => 4,
            _ => 3,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
