//! Simulator and cost model for blocked dense matrix-vector kernels
//! (GEMV, SYMV, HEMV) on many-core SIMT devices.

pub mod cli;
pub mod cost;
pub mod device;
pub mod error;
pub mod generate;
pub mod kernel;
pub mod matrix;
pub mod mgpu;
pub mod offset;
pub mod partition;
pub mod precision;
pub mod queue;
pub mod reference;
pub mod roofline;
pub mod tuner;

pub use error::{Error, Result};
