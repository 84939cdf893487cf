use thiserror::Error;

/// Errors raised while building, evaluating or analysing a super fractal
/// interpolation model.
#[derive(Debug, Error)]
pub enum SfifError {
    #[error("invalid interpolation data: {0}")]
    InvalidData(String),

    #[error("x = {x} lies outside [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A scaling factor or contraction factor is outside the admissible range.
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("C2 linear system is numerically singular (condition estimate {0:e})")]
    Singular(f64),

    #[error("depth: {0}")]
    Depth(String),

    #[error("order fit: {0}")]
    Fit(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("IFS {k}: {source}")]
    InIfs {
        k: usize,
        #[source]
        source: Box<SfifError>,
    },
}

impl SfifError {
    /// Strips the per-IFS annotation and returns the underlying error.
    pub fn root(&self) -> &SfifError {
        match self {
            SfifError::InIfs { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, SfifError>;
