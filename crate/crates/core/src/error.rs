use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("user {user} at ({x}, {y}) lies outside the service region")]
    OutOfRegion { user: usize, x: f64, y: f64 },

    #[error("activation set is empty")]
    EmptyActivation,

    #[error("position index {index} out of range (L = {len})")]
    PositionOutOfRange { index: usize, len: usize },

    #[error("user {user} has zero effective channel gain")]
    ZeroGain { user: usize },

    #[error("Dinkelbach parameter must be strictly positive, got {0}")]
    NonPositiveBeta(f64),

    #[error("QoS constraints cannot be met: alpha_K_min = {alpha_min}, alpha_K_max = {alpha_max}")]
    Infeasible { alpha_min: f64, alpha_max: f64 },

    #[error("no single-position activation satisfies the QoS constraints")]
    InitializationInfeasible,

    #[error("exhaustive search over L = {positions} positions exceeds the cap of {cap}")]
    SearchSpaceTooLarge { positions: usize, cap: usize },

    #[error("Dinkelbach iteration did not converge within {iterations} iterations (last step {last_step})")]
    DinkelbachDiverged { iterations: usize, last_step: f64 },

    #[error("matching did not stabilize within {sweeps} sweeps")]
    MatchingSweepCap { sweeps: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors that come from malformed user input rather than the filesystem
    /// or the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::OutOfRegion { .. }
                | Error::SearchSpaceTooLarge { .. }
        )
    }
}
