//! File formats, experiment reports, simulation studies and the command-line
//! driver for group LNGCA. The numerics live in `nglab-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod nulls;
pub mod report;
pub mod study;

pub use error::{Error, Result};
pub use nglab_core as core;
