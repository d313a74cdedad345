//! File formats, dataset IO and the `noisecal` command line on top of [`noisecal_core`].
//!
//! * [`eldr`]: the ELDR v1 raw container
//! * [`pgm`]: 16-bit binary PGM import/export with a JSON metadata sidecar
//! * [`banding`]: Fourier spectrum of bias frames
//! * [`dataset`]: calibration datasets on disk
//! * [`simulate`]: virtual-camera datasets written to disk
//! * [`pipeline`]: multi-ISO calibration and the self test
//! * [`cli`]: argument parsing and subcommands

pub mod banding;
pub mod cli;
pub mod dataset;
pub mod eldr;
pub mod error;
pub mod pgm;
pub mod pipeline;
pub mod profile_io;
pub mod provenance;
pub mod report;
pub mod simulate;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
