//! Structure-preserving interpolation of quadratic-bilinear systems.

pub mod benchmarks;
pub mod error;
pub mod experiment;
pub mod interpolation;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod pod;
pub mod projection;
pub mod simulation;
pub mod system;
pub mod tf;

pub use error::{MorError, Result};
pub use num_complex::Complex64;
