use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid physical parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Gaussian is not normalizable: Re(alpha) = {0}")]
    NonNormalizable(f64),

    #[error("state escaped the grid: boundary mass fraction {fraction:.3e} exceeds {tolerance:.1e}")]
    GridEscape { fraction: f64, tolerance: f64 },

    #[error("state norm underflowed (norm^2 = {0:.3e})")]
    ZeroNorm(f64),

    #[error("time step too large: lambda * x_max^2 * dt = {0:.3e} > 0.1")]
    StepTooLarge(f64),

    #[error("noise increment {increment:.3e} exceeds 10*sqrt(dt) = {limit:.3e}")]
    IncrementOutOfRange { increment: f64, limit: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("collapse operators {0} and {1} do not commute (residual {2:.3e})")]
    NonCommuting(usize, usize, f64),

    #[error("Gaussian width lost normalizability at step {0}")]
    BlowUp(usize),

    #[error("trajectory span omega*t = {available:.3} is shorter than required {required:.3}")]
    InsufficientSpan { available: f64, required: f64 },

    #[error("Hermite recurrence overflow at order {0}")]
    RecurrenceOverflow(usize),

    #[error("mode projection ill-conditioned: reconstruction residual {0:.3e}")]
    IllConditioned(f64),

    #[error("bad superposition weights: |alpha|^2 + |beta|^2 = {0}")]
    BadWeights(f64),

    #[error("configuration invalid: {0}")]
    ConfigInvalid(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("step {index} (t = {time:.6e}): {source}")]
    AtStep {
        index: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_step(self, index: usize, time: f64) -> Self {
        Error::AtStep {
            index,
            time,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through step annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}
