//! Synthetic models, non-Gaussian dummy laws, distributional diagnostics and
//! Monte Carlo drivers for virtual-dummy selection experiments.

pub mod error;
pub mod experiments;
pub mod generate;
pub mod metrics;

pub use error::{Result, SimError};
pub use generate::{CoordinateLaw, DummyScale, ModelInstance};
