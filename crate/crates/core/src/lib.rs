//! Semantic fast-forward for first-person video.
//!
//! Frames are scored by the detected regions of interest they contain, the
//! score series is split into semantic and non-semantic segments, each class
//! gets its own playback rate, and a shortest path through a per-segment
//! transition graph picks the output frames. The sampled sequence is then
//! stabilized against per-patch master frames with fractional homography
//! powers, filling holes from frames the sampler skipped.
//!
//! Everything here is pure computation over in-memory buffers; file formats,
//! parallel cost evaluation and the command line live in the `semfast` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod eval;
pub mod frame;
pub mod geometry;
pub mod motion;
pub mod planner;
pub mod sampler;
pub mod segment;
pub mod semantic;
pub mod stabilize;

pub use error::{Error, Result};
pub use frame::{Dims, Frame, FrameSequence, Histogram, Rect, Roi};
pub use geometry::{Homography, Mat3, Point};
