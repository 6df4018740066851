//! Frames, frame sequences, ROI labels and color histograms.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Luma of an RGB triple, `0.299R + 0.587G + 0.114B` rounded to nearest.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let v = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((v + 500) / 1000) as u8
}

/// Converts an interleaved RGB plane to grayscale.
pub fn rgb_to_gray(rgb: &[u8]) -> Vec<u8> {
    rgb.chunks_exact(3).map(|p| luma(p[0], p[1], p[2])).collect()
}

/// A single raster frame.
///
/// `index` is the 0-based position within its sequence; `source_index` keeps
/// the index parsed from the file name (or the original-video frame this one
/// was derived from).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: usize,
    pub source_index: u64,
    width: u32,
    height: u32,
    gray: Vec<u8>,
    color: Option<Vec<u8>>,
}

impl Frame {
    pub fn from_gray(index: usize, width: u32, height: u32, gray: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if gray.len() != width as usize * height as usize {
            return Err(Error::InvalidFrame("gray plane length does not match dimensions"));
        }
        Ok(Frame {
            index,
            source_index: index as u64,
            width,
            height,
            gray,
            color: None,
        })
    }

    /// Builds a frame from interleaved RGB; the gray plane is derived.
    pub fn from_rgb(index: usize, width: u32, height: u32, rgb: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        if rgb.len() != 3 * width as usize * height as usize {
            return Err(Error::InvalidFrame("color plane length does not match dimensions"));
        }
        Ok(Frame {
            index,
            source_index: index as u64,
            width,
            height,
            gray: rgb_to_gray(&rgb),
            color: Some(rgb),
        })
    }

    pub fn with_source_index(mut self, source_index: u64) -> Self {
        self.source_index = source_index;
        self
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.width, self.height)
    }

    pub fn gray(&self) -> &[u8] {
        &self.gray
    }

    pub fn color(&self) -> Option<&[u8]> {
        self.color.as_deref()
    }

    pub fn gray_view(&self) -> GrayView<'_> {
        GrayView {
            width: self.width as usize,
            height: self.height as usize,
            data: &self.gray,
        }
    }

    /// Copies out the pixels inside `rect`.
    pub fn crop(&self, rect: Rect) -> Frame {
        let w = self.width as usize;
        let mut gray = Vec::with_capacity(rect.area());
        for y in rect.y..rect.y + rect.h {
            let row = y as usize * w;
            gray.extend_from_slice(&self.gray[row + rect.x as usize..row + (rect.x + rect.w) as usize]);
        }
        let color = self.color.as_ref().map(|c| {
            let mut out = Vec::with_capacity(3 * rect.area());
            for y in rect.y..rect.y + rect.h {
                let row = 3 * y as usize * w;
                out.extend_from_slice(&c[row + 3 * rect.x as usize..row + 3 * (rect.x + rect.w) as usize]);
            }
            out
        });
        Frame {
            index: self.index,
            source_index: self.source_index,
            width: rect.w,
            height: rect.h,
            gray,
            color,
        }
    }

    pub(crate) fn from_parts(
        index: usize,
        source_index: u64,
        width: u32,
        height: u32,
        gray: Vec<u8>,
        color: Option<Vec<u8>>,
    ) -> Frame {
        debug_assert_eq!(gray.len(), width as usize * height as usize);
        Frame {
            index,
            source_index,
            width,
            height,
            gray,
            color,
        }
    }
}

fn check_dims(width: u32, height: u32) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidFrame("width and height must be positive"));
    }
    Ok(())
}

/// Borrowed grayscale plane.
#[derive(Debug, Clone, Copy)]
pub struct GrayView<'a> {
    pub width: usize,
    pub height: usize,
    pub data: &'a [u8],
}

impl GrayView<'_> {
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dims {
    pub width: u32,
    pub height: u32,
}

impl Dims {
    pub const fn new(width: u32, height: u32) -> Self {
        Dims { width, height }
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn area(&self) -> usize {
        self.w as usize * self.h as usize
    }

    /// Strict containment: `other` lies inside `self` and they differ.
    pub fn strictly_contains(&self, other: &Rect) -> bool {
        self.x <= other.x
            && self.y <= other.y
            && self.x + self.w >= other.x + other.w
            && self.y + self.h >= other.y + other.h
            && self != other
    }

    /// A rectangle of `w`×`h` centered in a frame of `dims`.
    pub fn centered(dims: Dims, w: u32, h: u32) -> Rect {
        let w = w.clamp(1, dims.width);
        let h = h.clamp(1, dims.height);
        Rect {
            x: (dims.width - w) / 2,
            y: (dims.height - h) / 2,
            w,
            h,
        }
    }
}

/// An ordered, immutable collection of equally sized frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    pub fps: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self> {
        let first = frames.first().ok_or(Error::EmptySequence)?;
        let expected = (first.width, first.height);
        for (pos, f) in frames.iter().enumerate() {
            if (f.width, f.height) != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: (f.width, f.height),
                });
            }
            if pos > 0 && f.index <= frames[pos - 1].index {
                return Err(Error::UnorderedFrames { position: pos });
            }
        }
        Ok(FrameSequence { frames, fps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<&Frame> {
        self.frames.get(k)
    }

    pub fn dims(&self) -> Dims {
        self.frames[0].dims()
    }
}

/// A detector region of interest.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Roi {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    #[cfg_attr(feature = "serde", serde(rename = "conf"))]
    pub confidence: f64,
}

impl Roi {
    pub fn validate(&self, dims: Dims, frame: usize) -> Result<()> {
        let bad = |reason| Err(Error::InvalidRoi { frame, reason });
        if self.w == 0 || self.h == 0 {
            return bad("empty extent");
        }
        if self.x as u64 + self.w as u64 > dims.width as u64 {
            return bad("extends past the right edge");
        }
        if self.y as u64 + self.h as u64 > dims.height as u64 {
            return bad("extends past the bottom edge");
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return bad("confidence outside [0, 1]");
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (
            self.x as f64 + self.w as f64 / 2.0,
            self.y as f64 + self.h as f64 / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.w as f64 * self.h as f64
    }
}

/// Per-channel normalized histogram, channels stored back to back.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
    bin_count: usize,
    channels: usize,
}

impl Histogram {
    pub fn from_channels(channels: &[Vec<f64>]) -> Result<Self> {
        let bin_count = channels.first().map(|c| c.len()).unwrap_or(0);
        if bin_count == 0 {
            return Err(Error::ZeroBins);
        }
        if channels.iter().any(|c| c.len() != bin_count) {
            return Err(Error::BinMismatch);
        }
        Ok(Histogram {
            bins: channels.iter().flatten().copied().collect(),
            bin_count,
            channels: channels.len(),
        })
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.bins[c * self.bin_count..(c + 1) * self.bin_count]
    }
}

/// Normalized per-channel histogram of a frame. Gray-only frames yield a
/// single channel.
pub fn color_histogram(frame: &Frame, bin_count: usize) -> Result<Histogram> {
    if bin_count == 0 {
        return Err(Error::ZeroBins);
    }
    let bin_of = |v: u8| (v as usize * bin_count) / 256;
    let (channels, counts) = match frame.color() {
        Some(rgb) => {
            let mut counts = vec![0u64; 3 * bin_count];
            for px in rgb.chunks_exact(3) {
                for c in 0..3 {
                    counts[c * bin_count + bin_of(px[c])] += 1;
                }
            }
            (3, counts)
        }
        None => {
            let mut counts = vec![0u64; bin_count];
            for &v in frame.gray() {
                counts[bin_of(v)] += 1;
            }
            (1, counts)
        }
    };
    let total = frame.dims().pixels() as f64;
    Ok(Histogram {
        bins: counts.into_iter().map(|c| c as f64 / total).collect(),
        bin_count,
        channels,
    })
}
