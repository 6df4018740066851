//! Homography stabilization of a sampled sequence.
//!
//! The sampled frames are split into patches of `alpha` frames and each patch
//! elects a master. Frames between two anchors are warped by a blend of
//! fractional homography powers toward both anchors, so anchors stay fixed
//! and the camera path between them becomes a straight interpolation.
//! Frames whose warp leaves holes in the visible crop area are patched with
//! pixels from skipped original frames, or replaced by a skipped frame.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::frame::{luma, Dims, Frame, FrameSequence, GrayView, Rect};
use crate::geometry::{fractional_power, Homography};
use crate::motion::{
    estimate_homography_ransac, inlier_score, match_features, DetectorConfig, FeatureDetector, FeatureSet,
    HarrisDetector, RansacConfig,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizerConfig {
    /// Patch length in output frames, a power of two.
    pub alpha: usize,
    /// Drop rectangle side as a fraction of the frame side.
    pub dp: f64,
    /// Crop margin on each side as a fraction of the frame side.
    pub cp: f64,
    /// Spread of the coverage Gaussian, in percentage points.
    pub sigma_cov: f64,
    pub eta: f64,
    pub max_replacements: usize,
    /// Donors tried per attempt before giving up on stitching.
    pub max_donors: usize,
    /// Inliers required to accept an alignment.
    pub min_inliers: usize,
    /// How many earlier sampled frames to try when chaining alignments.
    pub chain_lookback: usize,
    pub max_match_distance: f64,
    pub detector: DetectorConfig,
    pub ransac: RansacConfig,
}

impl Default for StabilizerConfig {
    fn default() -> Self {
        StabilizerConfig {
            alpha: 32,
            dp: 0.5,
            cp: 0.05,
            sigma_cov: 25.0,
            eta: 1.0,
            max_replacements: 3,
            max_donors: 8,
            min_inliers: 15,
            chain_lookback: 3,
            max_match_distance: 0.6,
            detector: DetectorConfig::default(),
            ransac: RansacConfig::default(),
        }
    }
}

impl StabilizerConfig {
    pub fn validate(&self, dims: Dims) -> Result<()> {
        if self.alpha < 2 || !self.alpha.is_power_of_two() {
            return Err(Error::InvalidConfig("alpha must be a power of two, at least 2"));
        }
        if !(self.dp > 0.0 && self.dp < 1.0) {
            return Err(Error::InvalidConfig("dp must lie in (0, 1)"));
        }
        if !(self.cp > 0.0 && self.cp < 0.5) {
            return Err(Error::InvalidConfig("cp must lie in (0, 0.5)"));
        }
        if !(self.sigma_cov > 0.0) || !(self.eta > 0.0) {
            return Err(Error::InvalidConfig("sigma_cov and eta must be positive"));
        }
        if !self.crop_rect(dims).strictly_contains(&self.drop_rect(dims)) {
            return Err(Error::InvalidConfig("crop rectangle must strictly contain the drop rectangle"));
        }
        Ok(())
    }

    pub fn drop_rect(&self, dims: Dims) -> Rect {
        let w = (self.dp * dims.width as f64).round() as u32;
        let h = (self.dp * dims.height as f64).round() as u32;
        Rect::centered(dims, w.max(1), h.max(1))
    }

    pub fn crop_rect(&self, dims: Dims) -> Rect {
        let w = ((1.0 - 2.0 * self.cp) * dims.width as f64).round() as u32;
        let h = ((1.0 - 2.0 * self.cp) * dims.height as f64).round() as u32;
        Rect::centered(dims, w.max(1), h.max(1))
    }
}

/// Consecutive ranges of `alpha` slots; the last one may be shorter.
pub fn partition_patches(n: usize, alpha: usize) -> Vec<Range<usize>> {
    (0..n).step_by(alpha.max(1)).map(|s| s..(s + alpha).min(n)).collect()
}

/// Index in `0..n` maximizing `Σ_{i≠f} score(i, f)`; ties go to the earliest.
pub fn select_master(n: usize, mut score: impl FnMut(usize, usize) -> usize) -> usize {
    let mut best = (0, 0usize);
    for f in 0..n {
        let total: usize = (0..n).filter(|&i| i != f).map(|i| score(i, f)).sum();
        if f == 0 || total > best.1 {
            best = (f, total);
        }
    }
    best.0
}

/// `w = δ / Δ`.
pub fn transition_weight(delta: usize, big_delta: usize) -> f64 {
    debug_assert!(big_delta >= 1 && delta <= big_delta);
    delta as f64 / big_delta as f64
}

/// Warp toward the previous and posterior anchors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpSpec {
    pub h_pre: Homography,
    pub h_pos: Homography,
    pub w: f64,
    pub delta: usize,
    pub big_delta: usize,
}

impl WarpSpec {
    pub fn identity() -> Self {
        WarpSpec {
            h_pre: Homography::IDENTITY,
            h_pos: Homography::IDENTITY,
            w: 0.0,
            delta: 0,
            big_delta: 1,
        }
    }

    /// `h_pre^(1−w) · h_pos^w`.
    pub fn matrix(&self) -> Result<Homography> {
        let a = fractional_power(&self.h_pre, 1.0 - self.w)?;
        let b = fractional_power(&self.h_pos, self.w)?;
        Ok(a * b)
    }
}

/// A resampled frame with a per-pixel validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedFrame {
    pub width: u32,
    pub height: u32,
    pub gray: Vec<u8>,
    pub color: Option<Vec<u8>>,
    pub valid: Vec<bool>,
}

impl WarpedFrame {
    pub fn dims(&self) -> Dims {
        Dims::new(self.width, self.height)
    }

    pub fn gray_view(&self) -> GrayView<'_> {
        GrayView {
            width: self.width as usize,
            height: self.height as usize,
            data: &self.gray,
        }
    }

    pub fn coverage(&self, rect: Rect) -> f64 {
        coverage(&self.valid, self.width, rect)
    }

    /// Copies `other`'s valid pixels into positions invalid here.
    pub fn fill_from(&mut self, other: &WarpedFrame) -> usize {
        let mut filled = 0;
        for p in 0..self.valid.len() {
            if !self.valid[p] && other.valid[p] {
                self.valid[p] = true;
                self.gray[p] = other.gray[p];
                if let (Some(c), Some(o)) = (self.color.as_mut(), other.color.as_ref()) {
                    c[3 * p..3 * p + 3].copy_from_slice(&o[3 * p..3 * p + 3]);
                }
                filled += 1;
            }
        }
        filled
    }

    pub fn into_frame(self, index: usize, source_index: u64) -> Frame {
        Frame::from_parts(index, source_index, self.width, self.height, self.gray, self.color)
    }
}

/// Fraction of `rect` marked valid in a row-major mask of the given width.
pub fn coverage(valid: &[bool], width: u32, rect: Rect) -> f64 {
    if rect.area() == 0 {
        return 1.0;
    }
    let w = width as usize;
    let mut count = 0usize;
    for y in rect.y as usize..(rect.y + rect.h) as usize {
        let row = &valid[y * w + rect.x as usize..y * w + (rect.x + rect.w) as usize];
        count += row.iter().filter(|&&v| v).count();
    }
    count as f64 / rect.area() as f64
}

/// Resamples `frame` so that source point `x` lands at `h · x`.
///
/// Inverse mapping with bilinear interpolation; pixel centers sit on integer
/// coordinates and output pixels whose preimage leaves `[0, W−1]×[0, H−1]`
/// are black and invalid. The identity warp is an exact copy.
pub fn warp_frame(frame: &Frame, h: &Homography) -> WarpedFrame {
    let (width, height) = (frame.width(), frame.height());
    if h.is_identity() {
        return WarpedFrame {
            width,
            height,
            gray: frame.gray().to_vec(),
            color: frame.color().map(<[u8]>::to_vec),
            valid: vec![true; frame.dims().pixels()],
        };
    }
    let inv = h.inverse();
    let (w, ht) = (width as usize, height as usize);
    let (xmax, ymax) = ((w - 1) as f64, (ht - 1) as f64);
    let src_gray = frame.gray();
    let src_color = frame.color();
    let mut gray = vec![0u8; w * ht];
    let mut color = src_color.map(|_| vec![0u8; 3 * w * ht]);
    let mut valid = vec![false; w * ht];

    for y in 0..ht {
        for x in 0..w {
            let Some((sx, sy)) = inv.apply(x as f64, y as f64) else {
                continue;
            };
            if !(sx >= 0.0 && sx <= xmax && sy >= 0.0 && sy <= ymax) {
                continue;
            }
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(ht - 1);
            let weights = [(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy];
            let taps = [y0 * w + x0, y0 * w + x1, y1 * w + x0, y1 * w + x1];
            let sample = |plane: &[u8], stride: usize, c: usize| -> u8 {
                let v: f64 = taps
                    .iter()
                    .zip(weights)
                    .map(|(&t, k)| plane[t * stride + c] as f64 * k)
                    .sum();
                (v + 0.5).floor().clamp(0.0, 255.0) as u8
            };
            let p = y * w + x;
            // color frames derive gray from the resampled RGB, as on load
            gray[p] = match (color.as_mut(), src_color) {
                (Some(out), Some(src)) => {
                    let rgb = [sample(src, 3, 0), sample(src, 3, 1), sample(src, 3, 2)];
                    out[3 * p..3 * p + 3].copy_from_slice(&rgb);
                    luma(rgb[0], rgb[1], rgb[2])
                }
                _ => sample(src_gray, 1, 0),
            };
            valid[p] = true;
        }
    }
    WarpedFrame {
        width,
        height,
        gray,
        color,
        valid,
    }
}

pub fn smooth_frame(frame: &Frame, spec: &WarpSpec) -> Result<WarpedFrame> {
    Ok(warp_frame(frame, &spec.matrix()?))
}

fn detector(cfg: &StabilizerConfig) -> HarrisDetector {
    HarrisDetector::new(cfg.detector)
}

/// Homography mapping `a` coordinates onto `b`, if enough inliers agree.
pub fn align(a: &FeatureSet, b: &FeatureSet, cfg: &StabilizerConfig) -> Option<Homography> {
    let matches = match_features(a, b).gated(cfg.max_match_distance);
    estimate_homography_ransac(&matches, &a.keypoints, &b.keypoints, &cfg.ransac)
        .ok()
        .filter(|r| r.inliers >= cfg.min_inliers)
        .map(|r| r.h)
}

/// Aligns `donor` to the frame `base` was warped from and copies donor pixels
/// into `base`'s holes. `base_h` is the warp that produced `base`.
pub fn stitch(
    base: &mut WarpedFrame,
    base_h: &Homography,
    base_features: &FeatureSet,
    donor: &Frame,
    donor_features: &FeatureSet,
    cfg: &StabilizerConfig,
) -> Result<usize> {
    let to_base = align(donor_features, base_features, cfg).ok_or(Error::AlignmentFailure)?;
    let warped = warp_frame(donor, &(*base_h * to_base));
    Ok(base.fill_from(&warped))
}

/// Inputs to the replacement score of one candidate frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub frame: usize,
    /// Fraction of the crop area left uncovered after alignment.
    pub uncovered: f64,
    pub inliers_prev: usize,
    pub inliers_next: usize,
    pub semantic: f64,
}

/// `G(u) · (R_prev + R_next) · (η + S)` with `G(u) = exp(−(100u)² / 2σ²)`.
pub fn replacement_score(c: &Candidate, cfg: &StabilizerConfig) -> f64 {
    let u = 100.0 * c.uncovered;
    let g = (-(u * u) / (2.0 * cfg.sigma_cov * cfg.sigma_cov)).exp();
    g * (c.inliers_prev + c.inliers_next) as f64 * (cfg.eta + c.semantic)
}

/// Highest-scoring candidate; ties go to the frame closest to `replaced`,
/// then the earlier one.
pub fn select_replacement(candidates: &[Candidate], replaced: usize, cfg: &StabilizerConfig) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for c in candidates {
        let s = replacement_score(c, cfg);
        let better = match best {
            None => true,
            Some((bs, bf)) => {
                s > bs || (s == bs && (c.frame.abs_diff(replaced), c.frame) < (bf.abs_diff(replaced), bf))
            }
        };
        if better {
            best = Some((s, c.frame));
        }
    }
    best.map(|(_, f)| f).ok_or(Error::NoCandidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FrameState {
    Done,
    Stitched,
    Dropped,
    /// Emitted unstabilized because its whole patch was lost.
    Passthrough,
}

/// One attempt at filling an output slot.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameOutcome {
    pub slot: usize,
    pub source_frame: usize,
    pub state: FrameState,
    pub donors: Vec<usize>,
    pub crop_coverage: f64,
    pub drop_coverage: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchPlan {
    pub patches: Vec<Range<usize>>,
    /// Master slot of each patch.
    pub masters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stabilized {
    /// Output frames, cropped; `source_index` holds the position of the
    /// original frame each one was rendered from.
    pub frames: Vec<Frame>,
    pub outcomes: Vec<FrameOutcome>,
    pub plan: PatchPlan,
    pub collapsed_patches: Vec<usize>,
}

impl Stabilized {
    pub fn sequence(&self, fps: f64) -> Result<FrameSequence> {
        FrameSequence::new(self.frames.clone(), fps)
    }
}

/// Pose of a frame relative to the first frame of its alignment chain.
#[derive(Debug, Clone, Copy)]
struct Pose {
    chain: usize,
    t: Homography,
}

struct Engine<'a> {
    original: &'a FrameSequence,
    scores: &'a [f64],
    cfg: &'a StabilizerConfig,
    detector: HarrisDetector,
    cache: Vec<Option<FeatureSet>>,
    drop: Rect,
    crop: Rect,
}

impl Engine<'_> {
    fn features(&mut self, k: usize) -> &FeatureSet {
        if self.cache[k].is_none() {
            let f = &self.original.frames()[k];
            self.cache[k] = Some(self.detector.detect(f.gray_view(), None));
        }
        self.cache[k].as_ref().unwrap()
    }

    fn align_frames(&mut self, a: usize, b: usize) -> Option<Homography> {
        self.features(a);
        self.features(b);
        align(self.cache[a].as_ref().unwrap(), self.cache[b].as_ref().unwrap(), self.cfg)
    }

    fn inliers(&mut self, a: usize, b: usize) -> usize {
        self.features(a);
        self.features(b);
        inlier_score(self.cache[a].as_ref().unwrap(), self.cache[b].as_ref().unwrap(), &self.cfg.ransac)
    }

    fn frame(&self, k: usize) -> &Frame {
        &self.original.frames()[k]
    }
}

/// Anchors bracketing each slot: the masters plus the first and last slot.
fn anchors(n: usize, masters: &[usize]) -> Vec<usize> {
    let mut a = masters.to_vec();
    a.push(0);
    a.push(n - 1);
    a.sort_unstable();
    a.dedup();
    a
}

fn bracket(anchors: &[usize], i: usize) -> (usize, usize) {
    let pos_idx = anchors.partition_point(|&a| a < i);
    let pos = anchors[pos_idx];
    let pre = if pos == i { i } else { anchors[pos_idx - 1] };
    (pre, if pre == i { i } else { pos })
}

/// Warp spec of original frame `at` with pose `p`, between the anchors `pre`
/// and `pos` (given by original frame index). Distances count original
/// frames, so uneven sampling does not bend the interpolated path. `None` if
/// the frame shares a chain with neither anchor.
fn warp_spec(p: Pose, pre: (usize, Pose), pos: (usize, Pose), at: usize) -> Option<WarpSpec> {
    let to = |anchor: Pose| (anchor.chain == p.chain).then(|| anchor.t.inverse() * p.t);
    let big_delta = pos.0.saturating_sub(pre.0).max(1);
    let delta = at.saturating_sub(pre.0).min(big_delta);
    match (to(pre.1), to(pos.1)) {
        (Some(a), Some(b)) => Some(WarpSpec {
            h_pre: a,
            h_pos: b,
            w: transition_weight(delta, big_delta),
            delta,
            big_delta,
        }),
        (Some(a), None) => Some(WarpSpec {
            h_pre: a,
            h_pos: Homography::IDENTITY,
            w: 0.0,
            delta,
            big_delta,
        }),
        (None, Some(b)) => Some(WarpSpec {
            h_pre: Homography::IDENTITY,
            h_pos: b,
            w: 1.0,
            delta,
            big_delta,
        }),
        (None, None) => None,
    }
}

/// Runs the stabilizer over the frames of `original` listed in `selected`.
///
/// `scores` holds the semantic score of every original frame.
pub fn stabilize(
    original: &FrameSequence,
    selected: &[usize],
    scores: &[f64],
    cfg: &StabilizerConfig,
) -> Result<Stabilized> {
    let dims = original.dims();
    cfg.validate(dims)?;
    if selected.is_empty() {
        return Err(Error::EmptyOutput);
    }
    if selected.windows(2).any(|w| w[0] >= w[1]) || *selected.last().unwrap() >= original.len() {
        return Err(Error::InvalidConfig("selection must be strictly increasing and inside the video"));
    }
    if scores.len() != original.len() {
        return Err(Error::LengthMismatch {
            expected: original.len(),
            found: scores.len(),
        });
    }
    let mut eng = Engine {
        original,
        scores,
        cfg,
        detector: detector(cfg),
        cache: vec![None; original.len()],
        drop: cfg.drop_rect(dims),
        crop: cfg.crop_rect(dims),
    };
    let n = selected.len();

    // chained poses
    let mut poses: Vec<Pose> = Vec::with_capacity(n);
    let mut chains = 0;
    for k in 0..n {
        let mut pose = None;
        for back in 1..=cfg.chain_lookback.min(k) {
            if let Some(h) = eng.align_frames(selected[k], selected[k - back]) {
                let prev = poses[k - back];
                pose = Some(Pose {
                    chain: prev.chain,
                    t: prev.t * h,
                });
                break;
            }
        }
        poses.push(pose.unwrap_or_else(|| {
            chains += 1;
            Pose {
                chain: chains,
                t: Homography::IDENTITY,
            }
        }));
    }

    let patches = partition_patches(n, cfg.alpha);
    let masters: Vec<usize> = patches
        .iter()
        .map(|p| {
            let frames: Vec<usize> = selected[p.clone()].to_vec();
            p.start + select_master(frames.len(), |i, f| eng.inliers(frames[i], frames[f]))
        })
        .collect();
    let anchor_slots = anchors(n, &masters);

    let mut outcomes = Vec::new();
    let mut produced: Vec<Option<Frame>> = vec![None; n];
    let mut consumed: Vec<bool> = vec![false; original.len()];

    for slot in 0..n {
        let (pre, pos) = bracket(&anchor_slots, slot);
        let (pre, pos) = ((selected[pre], poses[pre]), (selected[pos], poses[pos]));
        let lo = if slot > 0 { selected[slot - 1] + 1 } else { 0 };
        let hi = if slot + 1 < n { selected[slot + 1] } else { original.len() };

        let mut source = selected[slot];
        let mut pose = Some(poses[slot]);
        let mut tried = vec![source];
        for round in 0..=cfg.max_replacements {
            let spec = pose.and_then(|p| warp_spec(p, pre, pos, source));
            let attempt = spec.and_then(|s| s.matrix().ok().map(|m| (s, m)));
            let mut outcome = FrameOutcome {
                slot,
                source_frame: source,
                state: FrameState::Dropped,
                donors: Vec::new(),
                crop_coverage: 0.0,
                drop_coverage: 0.0,
                w: spec.map_or(0.0, |s| s.w),
            };
            if let Some((_, m)) = attempt {
                let mut warped = warp_frame(eng.frame(source), &m);
                outcome.crop_coverage = warped.coverage(eng.crop);
                outcome.drop_coverage = warped.coverage(eng.drop);
                if outcome.crop_coverage == 1.0 {
                    outcome.state = FrameState::Done;
                } else if outcome.drop_coverage == 1.0 {
                    let mut donors: Vec<usize> = (lo..hi).filter(|&d| d != source && !consumed[d]).collect();
                    donors.sort_by_key(|&d| (d.abs_diff(source), d));
                    donors.truncate(cfg.max_donors);
                    for d in donors {
                        eng.features(source);
                        eng.features(d);
                        let filled = stitch(
                            &mut warped,
                            &m,
                            eng.cache[source].as_ref().unwrap(),
                            eng.frame(d),
                            eng.cache[d].as_ref().unwrap(),
                            cfg,
                        );
                        if matches!(filled, Ok(k) if k > 0) {
                            consumed[d] = true;
                            outcome.donors.push(d);
                            outcome.crop_coverage = warped.coverage(eng.crop);
                            if outcome.crop_coverage == 1.0 {
                                break;
                            }
                        }
                    }
                    if outcome.crop_coverage == 1.0 {
                        outcome.state = FrameState::Stitched;
                        outcome.drop_coverage = warped.coverage(eng.drop);
                    }
                }
                if outcome.state != FrameState::Dropped {
                    let out = warped.into_frame(slot, source as u64).crop(eng.crop);
                    produced[slot] = Some(out);
                    outcomes.push(outcome);
                    break;
                }
            }
            outcomes.push(outcome);
            if round == cfg.max_replacements {
                break;
            }
            let pool: Vec<usize> = (lo..hi).filter(|d| !tried.contains(d) && !consumed[*d]).collect();
            let Some((next, next_pose)) = choose_replacement(&mut eng, &poses, &anchor_slots, selected, slot, pre, pos, &pool)
            else {
                break;
            };
            tried.push(next);
            source = next;
            pose = next_pose;
        }
    }

    let mut collapsed = Vec::new();
    for (k, p) in patches.iter().enumerate() {
        if p.clone().all(|s| produced[s].is_none()) {
            collapsed.push(k);
            for s in p.clone() {
                let f = eng.frame(selected[s]).clone().with_source_index(selected[s] as u64);
                produced[s] = Some(f.crop(eng.crop));
                outcomes.push(FrameOutcome {
                    slot: s,
                    source_frame: selected[s],
                    state: FrameState::Passthrough,
                    donors: Vec::new(),
                    crop_coverage: 1.0,
                    drop_coverage: 1.0,
                    w: 0.0,
                });
            }
        }
    }
    outcomes.sort_by_key(|o| o.slot);

    let frames = produced
        .into_iter()
        .flatten()
        .enumerate()
        .map(|(k, mut f)| {
            f.index = k;
            f
        })
        .collect();
    Ok(Stabilized {
        frames,
        outcomes,
        plan: PatchPlan { patches, masters },
        collapsed_patches: collapsed,
    })
}

/// Scores every pool frame and returns the winner with its pose, if any.
#[allow(clippy::too_many_arguments)]
fn choose_replacement(
    eng: &mut Engine<'_>,
    poses: &[Pose],
    anchor_slots: &[usize],
    selected: &[usize],
    slot: usize,
    pre: (usize, Pose),
    pos: (usize, Pose),
    pool: &[usize],
) -> Option<(usize, Option<Pose>)> {
    if pool.is_empty() {
        return None;
    }
    let n = selected.len();
    let prev = slot.checked_sub(1);
    let next = (slot + 1 < n).then_some(slot + 1);

    // context: first-pass warp of a sampled neighbor
    let context = |nb: Option<usize>| -> Option<FeatureSet> {
        let nb = nb?;
        let (a, b) = bracket(anchor_slots, nb);
        let m = warp_spec(poses[nb], (selected[a], poses[a]), (selected[b], poses[b]), selected[nb])?
            .matrix()
            .ok()?;
        let w = warp_frame(eng.frame(selected[nb]), &m);
        Some(eng.detector.detect(w.gray_view(), Some(&w.valid)))
    };
    let ctx_prev = context(prev);
    let ctx_next = context(next);

    let mut candidates = Vec::with_capacity(pool.len());
    let mut cand_poses = Vec::with_capacity(pool.len());
    for &d in pool {
        let mut refs: Vec<usize> = [prev, next].into_iter().flatten().collect();
        refs.sort_by_key(|&r| (selected[r].abs_diff(d), r));
        let mut pose = None;
        for r in refs {
            if let Some(h) = eng.align_frames(d, selected[r]) {
                pose = Some(Pose {
                    chain: poses[r].chain,
                    t: poses[r].t * h,
                });
                break;
            }
        }
        let uncovered = pose
            .and_then(|p| warp_spec(p, pre, pos, d))
            .and_then(|s| s.matrix().ok())
            .map_or(1.0, |m| 1.0 - warp_frame(eng.frame(d), &m).coverage(eng.crop));
        eng.features(d);
        let fd = eng.cache[d].as_ref().unwrap();
        let r = |c: &Option<FeatureSet>| c.as_ref().map_or(0, |c| inlier_score(fd, c, &eng.cfg.ransac));
        candidates.push(Candidate {
            frame: d,
            uncovered,
            inliers_prev: r(&ctx_prev),
            inliers_next: r(&ctx_next),
            semantic: eng.scores[d],
        });
        cand_poses.push(pose);
    }
    let pick = select_replacement(&candidates, selected[slot], eng.cfg).ok()?;
    let k = pool.iter().position(|&d| d == pick)?;
    Some((pick, cand_poses[k]))
}
