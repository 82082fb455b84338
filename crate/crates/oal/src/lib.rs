//! File formats, checkpoints, run artifacts and the parallel episode runner
//! around [`oal_core`].

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod outputs;
pub mod pipeline;
pub mod report;
pub mod runner;
pub mod stemmer;

pub use error::{CliError, ErrorKind};
