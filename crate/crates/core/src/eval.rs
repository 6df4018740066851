//! Output metrics and a procedural test-scene generator.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::{luma, Dims, Frame, FrameSequence, Roi};
use crate::geometry::{Homography, Mat3};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InstabilityReport {
    pub index: f64,
    pub buffer_size: usize,
    pub n_frames: usize,
}

/// Mean over sliding windows of `buffer_size` frames of the per-pixel sample
/// variance (denominator `N_B − 1`), averaged over pixels. Gray plane only.
pub fn instability_index(frames: &[Frame], buffer_size: usize) -> Result<InstabilityReport> {
    let n = frames.len();
    if buffer_size < 2 || n < buffer_size {
        return Err(Error::TooShort {
            frames: n,
            buffer: buffer_size,
        });
    }
    let dims = frames[0].dims();
    if let Some(f) = frames.iter().find(|f| f.dims() != dims) {
        return Err(Error::DimensionMismatch {
            expected: (dims.width, dims.height),
            found: (f.width(), f.height()),
        });
    }
    let p = dims.pixels();
    let nb = buffer_size as i64;
    // running per-pixel sums keep every window exact in integers
    let mut s1 = vec![0i64; p];
    let mut s2 = vec![0i64; p];
    let add = |s1: &mut [i64], s2: &mut [i64], f: &Frame, sign: i64| {
        for (k, &v) in f.gray().iter().enumerate() {
            let v = v as i64;
            s1[k] += sign * v;
            s2[k] += sign * v * v;
        }
    };
    for f in &frames[..buffer_size] {
        add(&mut s1, &mut s2, f, 1);
    }
    let denom = (nb * (nb - 1)) as f64 * p as f64;
    let window = |s1: &[i64], s2: &[i64]| -> f64 {
        let num: i64 = s1.iter().zip(s2).map(|(&a, &b)| nb * b - a * a).sum();
        num as f64 / denom
    };
    let mut total = window(&s1, &s2);
    for i in 1..=n - buffer_size {
        add(&mut s1, &mut s2, &frames[i - 1], -1);
        add(&mut s1, &mut s2, &frames[i + buffer_size - 1], 1);
        total += window(&s1, &s2);
    }
    Ok(InstabilityReport {
        index: total / (n - buffer_size + 1) as f64,
        buffer_size,
        n_frames: n,
    })
}

/// `Σ S_x` over the selected frames.
pub fn semantic_content(selected: &[usize], scores: &[f64]) -> f64 {
    selected.iter().fold(0.0, |a, &i| a + scores[i])
}

pub fn achieved_speedup(n_in: usize, n_out: usize) -> Result<f64> {
    if n_out == 0 {
        return Err(Error::EmptyOutput);
    }
    Ok(n_in as f64 / n_out as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub achieved_speedup: f64,
    pub semantic_content: f64,
    pub instability: InstabilityReport,
}

/// Parameters of a procedurally rendered first-person scene.
///
/// The camera pans over an endless textured plane while zooming and rolling
/// at constant rates; independent per-frame jitter is composed on top.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SyntheticSceneSpec {
    pub n_frames: usize,
    pub width: u32,
    pub height: u32,
    /// Pan in pixels per frame.
    pub pan: (f64, f64),
    /// Relative scale change per frame.
    pub zoom: f64,
    /// Roll in radians per frame.
    pub roll: f64,
    /// Maximum absolute jitter translation per axis, pixels.
    pub jitter_translation: f64,
    /// Maximum absolute jitter roll, radians.
    pub jitter_rotation: f64,
    pub seed: u64,
    /// Inclusive frame ranges showing a region of interest.
    pub semantic_blocks: Vec<(usize, usize)>,
    /// Texture variant.
    pub texture: u64,
    pub color: bool,
}

impl Default for SyntheticSceneSpec {
    fn default() -> Self {
        SyntheticSceneSpec {
            n_frames: 100,
            width: 160,
            height: 120,
            pan: (0.8, 0.0),
            zoom: 0.0,
            roll: 0.0,
            jitter_translation: 0.0,
            jitter_rotation: 0.0,
            seed: 1,
            semantic_blocks: Vec::new(),
            texture: 0,
            color: false,
        }
    }
}

impl SyntheticSceneSpec {
    pub fn dims(&self) -> Dims {
        Dims::new(self.width, self.height)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 || self.width < 8 || self.height < 8 {
            return Err(Error::InvalidConfig("scene needs frames and at least 8x8 pixels"));
        }
        if !(self.jitter_translation >= 0.0) || !(self.jitter_rotation >= 0.0) {
            return Err(Error::InvalidConfig("jitter magnitudes must be non-negative"));
        }
        if self.semantic_blocks.iter().any(|&(a, b)| a > b || b >= self.n_frames) {
            return Err(Error::InvalidConfig("semantic block outside the frame range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub frames: FrameSequence,
    /// Maps frame pixel coordinates onto the texture plane.
    pub poses: Vec<Homography>,
    pub labels: Vec<Vec<Roi>>,
    pub semantic: Vec<bool>,
}

fn hash(a: i64, b: i64, salt: u64) -> u64 {
    let mut z = (a as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((b as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F))
        .wrapping_add(salt.wrapping_mul(0x1656_67B1_9E37_79F9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn tile(x: f64, y: f64, size: f64, salt: u64) -> f64 {
    let h = hash((x / size).floor() as i64, (y / size).floor() as i64, salt);
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Texture intensity at a plane point, per channel, in `[0, 255]`.
fn texture(x: f64, y: f64, variant: u64, channel: u64) -> f64 {
    let salt = variant.wrapping_mul(31).wrapping_add(channel);
    255.0 * (0.65 * tile(x, y, 7.0, salt) + 0.35 * tile(x + 3.0, y + 5.0, 23.0, salt ^ 0xABCD))
}

const ROI_FILL: u8 = 235;
const ROI_EDGE: u8 = 20;

/// Region of interest for frame `k`: a quarter-size box drifting slowly
/// around the center.
fn planted_roi(k: usize, dims: Dims) -> Roi {
    let (w, h) = (dims.width / 4, dims.height / 4);
    let t = k as f64 * 0.05;
    let cx = dims.width as f64 / 2.0 + 0.1 * dims.width as f64 * t.sin();
    let cy = dims.height as f64 / 2.0 + 0.1 * dims.height as f64 * (0.7 * t).cos();
    let x = (cx - w as f64 / 2.0).round().clamp(0.0, (dims.width - w) as f64) as u32;
    let y = (cy - h as f64 / 2.0).round().clamp(0.0, (dims.height - h) as f64) as u32;
    Roi {
        x,
        y,
        w,
        h,
        confidence: 1.0,
    }
}

/// Renders the scene; identical specs give bit-identical output.
pub fn generate_synthetic_scene(spec: &SyntheticSceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let dims = spec.dims();
    let (w, h) = (spec.width as usize, spec.height as usize);
    let (cx, cy) = dims.center();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut semantic = vec![false; spec.n_frames];
    for &(a, b) in &spec.semantic_blocks {
        semantic[a..=b].iter_mut().for_each(|s| *s = true);
    }

    let mut frames = Vec::with_capacity(spec.n_frames);
    let mut poses = Vec::with_capacity(spec.n_frames);
    let mut labels = Vec::with_capacity(spec.n_frames);
    let channels: &[u64] = if spec.color { &[0, 1, 2] } else { &[0] };
    const SUB: [(f64, f64); 4] = [(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)];

    for k in 0..spec.n_frames {
        let jt = spec.jitter_translation;
        let jr = spec.jitter_rotation;
        let (jx, jy, jtheta) = (
            if jt > 0.0 { rng.gen_range(-jt..=jt) } else { 0.0 },
            if jt > 0.0 { rng.gen_range(-jt..=jt) } else { 0.0 },
            if jr > 0.0 { rng.gen_range(-jr..=jr) } else { 0.0 },
        );
        let kf = k as f64;
        let scale = (1.0 + spec.zoom).powi(k as i32);
        let m = Mat3::translation(spec.pan.0 * kf + jx, spec.pan.1 * kf + jy)
            * Mat3::similarity_about(cx, cy, spec.roll * kf + jtheta, scale);
        let pose = Homography::new(m)?;

        let mut planes: Vec<Vec<u8>> = vec![vec![0u8; w * h]; channels.len()];
        for y in 0..h {
            for x in 0..w {
                let mut acc = [0.0f64; 3];
                for (dx, dy) in SUB {
                    let (px, py) = m.apply(x as f64 + dx, y as f64 + dy).unwrap_or((0.0, 0.0));
                    for (c, &ch) in channels.iter().enumerate() {
                        acc[c] += texture(px, py, spec.texture, ch);
                    }
                }
                for c in 0..channels.len() {
                    planes[c][y * w + x] = (acc[c] / 4.0).round().clamp(0.0, 255.0) as u8;
                }
            }
        }

        let mut rois = Vec::new();
        if semantic[k] {
            let roi = planted_roi(k, dims);
            for y in roi.y as usize..(roi.y + roi.h) as usize {
                for x in roi.x as usize..(roi.x + roi.w) as usize {
                    let edge = x < roi.x as usize + 2
                        || y < roi.y as usize + 2
                        || x + 2 >= (roi.x + roi.w) as usize
                        || y + 2 >= (roi.y + roi.h) as usize;
                    for plane in planes.iter_mut() {
                        plane[y * w + x] = if edge { ROI_EDGE } else { ROI_FILL };
                    }
                }
            }
            rois.push(roi);
        }

        let frame = if spec.color {
            let rgb: Vec<u8> = (0..w * h)
                .flat_map(|p| [planes[0][p], planes[1][p], planes[2][p]])
                .collect();
            Frame::from_rgb(k, spec.width, spec.height, rgb)?
        } else {
            Frame::from_gray(k, spec.width, spec.height, planes.swap_remove(0))?
        };
        frames.push(frame);
        poses.push(pose);
        labels.push(rois);
    }
    Ok(SyntheticScene {
        frames: FrameSequence::new(frames, 30.0)?,
        poses,
        labels,
        semantic,
    })
}

/// Gray value of an RGB pixel, exposed for fixtures that build color frames.
pub fn gray_of(r: u8, g: u8, b: u8) -> u8 {
    luma(r, g, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(index: usize, v: u8) -> Frame {
        Frame::from_gray(index, 8, 6, vec![v; 48]).unwrap()
    }

    #[test]
    fn constant_sequence_is_stable() {
        let frames: Vec<Frame> = (0..10).map(|i| uniform(i, 77)).collect();
        assert_eq!(instability_index(&frames, 5).unwrap().index, 0.0);
    }

    #[test]
    fn alternating_frames_give_fifty() {
        let frames: Vec<Frame> = (0..9).map(|i| uniform(i, if i % 2 == 0 { 100 } else { 110 })).collect();
        let r = instability_index(&frames, 2).unwrap();
        assert_eq!(r.index, 50.0);
        assert_eq!(r.n_frames, 9);
    }

    #[test]
    fn too_short() {
        let frames: Vec<Frame> = (0..3).map(|i| uniform(i, 1)).collect();
        assert!(matches!(instability_index(&frames, 5), Err(Error::TooShort { .. })));
        assert!(matches!(instability_index(&frames, 1), Err(Error::TooShort { .. })));
    }

    #[test]
    fn speedup_and_content() {
        assert_eq!(achieved_speedup(3000, 300).unwrap(), 10.0);
        assert_eq!(achieved_speedup(5, 5).unwrap(), 1.0);
        assert_eq!(achieved_speedup(5, 0), Err(Error::EmptyOutput));
        assert_eq!(semantic_content(&[], &[1.0, 2.0]), 0.0);
        assert_eq!(semantic_content(&[0, 1], &[1.0, 2.0]), 3.0);
    }

    #[test]
    fn static_scene_repeats() {
        let spec = SyntheticSceneSpec {
            n_frames: 4,
            width: 32,
            height: 24,
            pan: (0.0, 0.0),
            ..Default::default()
        };
        let s = generate_synthetic_scene(&spec).unwrap();
        let f = s.frames.frames();
        assert!(f.iter().all(|x| x.gray() == f[0].gray()));
    }

    #[test]
    fn blocks_mark_semantic_frames() {
        let spec = SyntheticSceneSpec {
            n_frames: 20,
            width: 32,
            height: 24,
            semantic_blocks: vec![(5, 9)],
            color: true,
            ..Default::default()
        };
        let s = generate_synthetic_scene(&spec).unwrap();
        assert_eq!(s.semantic.iter().filter(|&&b| b).count(), 5);
        assert!(s.labels[5..=9].iter().all(|l| l.len() == 1 && l[0].confidence == 1.0));
        assert!(s.labels[..5].iter().all(|l| l.is_empty()));
        assert!(s.frames.frames()[0].color().is_some());
        assert_eq!(s, generate_synthetic_scene(&spec).unwrap());
    }
}
