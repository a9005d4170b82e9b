//! File formats, scenario runner and CLI support for [`uavmimo_core`].
//!
//! - [`io`]: JSON config loading, CSV row types and writers
//! - [`report`]: `summary.json` and `manifest.json` contents
//! - [`run`]: drop/trajectory fan-out over a rayon pool and output writing

pub mod error;
pub mod io;
pub mod report;
pub mod run;

pub use error::{Error, Result};
pub use uavmimo_core as core;
