//! File formats, parallel cost evaluation and pipeline stages on top of
//! `semfast-core`.
//!
//! Every stage in [`stages`] reads plain files and writes plain files, so any
//! stage can be swapped for an external tool.

pub mod config;
pub mod costs;
pub mod error;
pub mod io;
pub mod stages;

pub use config::PipelineConfig;
pub use error::{Error, Result};
