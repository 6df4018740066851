//! Temporal segmentation of the semantic score series.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SegmentKind {
    Semantic,
    NonSemantic,
}

/// An inclusive frame range with a single class and playback rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub speedup: u32,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, frame: usize) -> bool {
        (self.start..=self.end).contains(&frame)
    }
}

/// Result of Otsu thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtsuThreshold {
    pub value: f64,
    /// Split bin index in `1..bin_count`; 0 when degenerate.
    pub split_bin: usize,
    /// Every score was identical, so the whole profile is one class.
    pub degenerate: bool,
}

/// Histogram of `scores` over `bin_count` uniform bins spanning `[min, max]`.
pub fn score_histogram(scores: &[f64], bin_count: usize) -> (Vec<u64>, f64, f64) {
    let (lo, hi) = scores
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let mut hist = vec![0u64; bin_count];
    let span = hi - lo;
    for &s in scores {
        let b = if span > 0.0 {
            (((s - lo) / span) * bin_count as f64) as usize
        } else {
            0
        };
        hist[b.min(bin_count - 1)] += 1;
    }
    (hist, lo, hi)
}

/// Otsu's threshold over a `bin_count`-bin histogram of the scores.
///
/// Splits are bin boundaries `t ∈ 1..bin_count` (class 0 = bins below `t`).
/// When several splits reach the maximal between-class variance, as every
/// split inside an empty gap does, the middle one (lower median) wins. Its
/// lower bin edge, mapped back to score units, is returned.
pub fn otsu_threshold(scores: &[f64], bin_count: usize) -> Result<OtsuThreshold> {
    if scores.is_empty() {
        return Err(Error::EmptyProfile);
    }
    if bin_count < 2 {
        return Err(Error::ZeroBins);
    }
    let (hist, lo, hi) = score_histogram(scores, bin_count);
    if hi <= lo {
        return Ok(OtsuThreshold {
            value: lo,
            split_bin: 0,
            degenerate: true,
        });
    }

    // Between-class variance up to a common factor is (N·s0 − S·w0)² / (w0·w1)
    // with integer counts and bin-weighted sums, compared exactly.
    let total = scores.len() as u128;
    let sum_all: u128 = hist.iter().enumerate().map(|(i, &c)| i as u128 * c as u128).sum();
    let (mut w0, mut sum0) = (0u128, 0u128);
    let mut best: Option<(u128, u128)> = None;
    let mut maximizers: Vec<usize> = Vec::new();
    for t in 1..bin_count {
        w0 += hist[t - 1] as u128;
        sum0 += (t - 1) as u128 * hist[t - 1] as u128;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let a = (total * sum0).abs_diff(sum_all * w0);
        let den = w0 * w1;
        match best {
            Some(b) if variance_greater(b, (a, den)) => {}
            Some(b) if !variance_greater((a, den), b) => maximizers.push(t),
            _ => {
                best = Some((a, den));
                maximizers.clear();
                maximizers.push(t);
            }
        }
    }
    // a non-degenerate histogram has mass in its first and last bins, so
    // some split exists
    let split_bin = maximizers[(maximizers.len() - 1) / 2];
    Ok(OtsuThreshold {
        value: lo + (hi - lo) * split_bin as f64 / bin_count as f64,
        split_bin,
        degenerate: false,
    })
}

/// `a₁² / d₁ > a₂² / d₂`, exact unless the products overflow.
fn variance_greater((a1, d1): (u128, u128), (a2, d2): (u128, u128)) -> bool {
    let exact = a1
        .checked_mul(a1)
        .and_then(|x| x.checked_mul(d2))
        .zip(a2.checked_mul(a2).and_then(|x| x.checked_mul(d1)));
    match exact {
        Some((l, r)) => l > r,
        None => {
            let (a1, a2) = (a1 as f64, a2 as f64);
            a1 * a1 / d1 as f64 > a2 * a2 / d2 as f64
        }
    }
}

/// Classifies frames scoring strictly above `threshold` as semantic, then
/// absorbs runs shorter than `min_len` into their neighbors.
///
/// Short runs are absorbed shortest first, semantic before non-semantic on
/// equal length, then earliest.
pub fn segment_by_threshold(scores: &[f64], threshold: f64, min_len: usize) -> Vec<Segment> {
    let mut runs: Vec<(usize, usize, SegmentKind)> = Vec::new();
    for (i, &s) in scores.iter().enumerate() {
        let kind = if s > threshold {
            SegmentKind::Semantic
        } else {
            SegmentKind::NonSemantic
        };
        match runs.last_mut() {
            Some(last) if last.2 == kind => last.1 = i,
            _ => runs.push((i, i, kind)),
        }
    }

    while runs.len() > 1 {
        let victim = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.1 - r.0 + 1 < min_len)
            .min_by_key(|(i, r)| (r.1 - r.0 + 1, r.2 != SegmentKind::Semantic, *i))
            .map(|(i, _)| i);
        let Some(v) = victim else { break };
        let flipped = match runs[v].2 {
            SegmentKind::Semantic => SegmentKind::NonSemantic,
            SegmentKind::NonSemantic => SegmentKind::Semantic,
        };
        runs[v].2 = flipped;
        let mut merged: Vec<(usize, usize, SegmentKind)> = Vec::with_capacity(runs.len());
        for r in runs.drain(..) {
            match merged.last_mut() {
                Some(last) if last.2 == r.2 => last.1 = r.1,
                _ => merged.push(r),
            }
        }
        runs = merged;
    }

    runs.into_iter()
        .map(|(start, end, kind)| Segment {
            start,
            end,
            kind,
            speedup: 1,
        })
        .collect()
}

/// Total frame counts `(semantic, non_semantic)`.
pub fn class_lengths(segments: &[Segment]) -> (usize, usize) {
    segments.iter().fold((0, 0), |(s, ns), seg| match seg.kind {
        SegmentKind::Semantic => (s + seg.len(), ns),
        SegmentKind::NonSemantic => (s, ns + seg.len()),
    })
}
