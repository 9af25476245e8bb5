//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the simulation / reconstruction chain.
#[derive(Debug, Error)]
pub enum Error {
    /// Dimensions of two objects (basis, matrix, data record) disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A coherence matrix violates Hermiticity, positivity or trace rules.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Quadrature grid too coarse for the requested modes/momenta.
    #[error("sampling too coarse: {0}")]
    Sampling(String),

    /// An operation requires a specific aperture family.
    #[error("aperture mismatch: {0}")]
    Aperture(String),

    /// A scalar argument is outside its documented range.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Measured data carry no usable information (all zero, all invalid).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Sensor geometry is unusable (overlapping apertures, disconnected graph).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem / serialization failure.
    #[error("io error: {0}")]
    Io(String),

    /// A pipeline stage failed; carries the stage tag for diagnostics.
    #[error("stage '{stage}' failed: {message}")]
    Pipeline { stage: &'static str, message: String },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl Error {
    /// Wrap an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Pipeline { .. } => self,
            other => Error::Pipeline {
                stage,
                message: other.to_string(),
            },
        }
    }

    /// Process exit code contract: 2 config, 3 numerical/runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Pipeline { stage, .. } if *stage == "config" => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
