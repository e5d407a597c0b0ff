//! Dataset files, checkpoints, mesh export, reports, multi-threaded
//! evaluation and the command-line front end for `mobiuse-core`.

pub mod checkpoint;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod mesh;
pub mod parallel;
pub mod report;
pub mod synthetic;

pub use error::{Error, Result};
