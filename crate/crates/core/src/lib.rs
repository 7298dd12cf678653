//! Selected-mapping (SLM) PAPR reduction for OFDM with adaptive generation:
//! candidate signals are produced one sample at a time from a lazily
//! evaluated IFFT and abandoned as soon as one sample proves they cannot be
//! selected.

pub mod analytics;
pub mod error;
pub mod harness;
pub mod ifft;
pub mod signal;
pub mod slm;

pub use error::{Result, SlmError};
