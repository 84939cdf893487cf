//! Process exit codes.

use sfif_core::SfifError;

/// Output could not be written.
pub const IO: u8 = 1;
/// Invalid configuration or input data.
pub const CONFIG: u8 = 2;
/// Scaling factors outside the admissible or derivative regime.
pub const REGIME: u8 = 3;
/// Singular spline system or unreadable model file.
pub const SOLVER: u8 = 4;
/// Requested tolerance needs more than the maximum depth.
pub const DEPTH: u8 = 5;
/// An empirical distance exceeded its theoretical bound.
pub const BOUND: u8 = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(CONFIG, message)
    }
}

pub fn code_for(err: &SfifError) -> u8 {
    match err.root() {
        SfifError::Regime(_) => REGIME,
        SfifError::Singular(_) | SfifError::ModelFile(_) => SOLVER,
        SfifError::Depth(_) => DEPTH,
        SfifError::Io { .. } => IO,
        _ => CONFIG,
    }
}

impl From<SfifError> for Failure {
    fn from(err: SfifError) -> Self {
        Self::new(code_for(&err), err.to_string())
    }
}
