use std::path::PathBuf;

use thiserror::Error;

use crate::experiments::config::ConfigError;
use crate::nonlinearity::Verdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("spectral functions live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} outside the admissible interval [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("nonlinearity is {verdict} (alpha = {alpha}, alpha_c = {alpha_c}); the RG flow only runs for irrelevant nonlinearities")]
    FlowRefused {
        verdict: Verdict,
        alpha: u32,
        alpha_c: f64,
    },

    #[error("analyticity region violated: {quantity} = {value:.6e} is not below {bound:.6e}")]
    Analyticity {
        quantity: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("Picard iteration did not converge in {iterations} iterations (last increment {increment:.3e}, tolerance {tol:.3e})")]
    PicardDivergence {
        iterations: usize,
        increment: f64,
        tol: f64,
    },

    #[error("small-data guard: B_q norm {norm:.6e} is not below the bound {bound:.6e} (set rg.small_data_override to proceed)")]
    SmallData { norm: f64, bound: f64 },

    #[error("amplitude blow-up at t = {t}: norm {norm:.6e} exceeds {limit:.6e}")]
    BlowUp { t: f64, norm: f64, limit: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
