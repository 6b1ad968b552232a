pub mod error;
pub mod experiments;
pub mod kernel;
pub mod nonlinearity;
pub mod oracle;
pub mod rg;
pub mod spectral;
pub mod stats;
pub mod timescale;

pub use error::{Error, Result};
