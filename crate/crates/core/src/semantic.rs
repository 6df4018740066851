//! Per-frame semantic scores from ROI labels.
//!
//! A frame's score is the sum over its ROIs of `confidence · area · G(center)`
//! where `G` is an unnormalized isotropic Gaussian (peak 1) centered on the
//! frame.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::frame::{Dims, Roi};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    pub sigma: f64,
    pub center: (f64, f64),
}

impl GaussianSpec {
    /// `σ = min(W/2, H/2)` centered on the frame.
    pub fn for_frame(dims: Dims) -> Self {
        let (cx, cy) = dims.center();
        GaussianSpec {
            sigma: cx.min(cy),
            center: (cx, cy),
        }
    }

    pub fn with_sigma(dims: Dims, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidConfig("sigma must be positive"));
        }
        Ok(GaussianSpec {
            sigma,
            center: dims.center(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticProfile {
    pub scores: Vec<f64>,
    pub sigma_used: f64,
}

impl SemanticProfile {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.scores.is_empty() {
            0.0
        } else {
            self.scores.iter().sum::<f64>() / self.scores.len() as f64
        }
    }
}

pub fn gaussian_weight(point: (f64, f64), spec: &GaussianSpec) -> f64 {
    let dx = point.0 - spec.center.0;
    let dy = point.1 - spec.center.1;
    (-(dx * dx + dy * dy) / (2.0 * spec.sigma * spec.sigma)).exp()
}

pub fn frame_semantic_score(rois: &[Roi], spec: &GaussianSpec) -> f64 {
    rois.iter()
        .map(|r| r.confidence * r.area() * gaussian_weight(r.center(), spec))
        .fold(0.0, |a, b| a + b)
}

pub fn score_series(labels: &[Vec<Roi>], n_frames: usize, spec: &GaussianSpec) -> Result<SemanticProfile> {
    if labels.len() != n_frames {
        return Err(Error::LengthMismatch {
            expected: n_frames,
            found: labels.len(),
        });
    }
    Ok(SemanticProfile {
        scores: labels.iter().map(|rois| frame_semantic_score(rois, spec)).collect(),
        sigma_used: spec.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const DIMS: Dims = Dims::new(200, 100);

    fn roi(cx: f64, cy: f64, w: u32, h: u32, confidence: f64) -> Roi {
        Roi {
            x: (cx - w as f64 / 2.0) as u32,
            y: (cy - h as f64 / 2.0) as u32,
            w,
            h,
            confidence,
        }
    }

    #[test]
    fn gaussian_reference_points() {
        let spec = GaussianSpec::for_frame(DIMS);
        assert_eq!(spec.sigma, 50.0);
        assert_eq!(gaussian_weight((100.0, 50.0), &spec), 1.0);
        assert!((gaussian_weight((150.0, 50.0), &spec) - 0.60653).abs() < 1e-5);
        assert!((gaussian_weight((100.0, 150.0), &spec) - 0.13534).abs() < 1e-5);
    }

    #[test]
    fn centered_roi_scores_its_area() {
        let spec = GaussianSpec::for_frame(DIMS);
        assert_eq!(frame_semantic_score(&[], &spec), 0.0);
        let r = roi(100.0, 50.0, 10, 10, 1.0);
        assert_eq!(frame_semantic_score(&[r], &spec), 100.0);
        let r2 = roi(40.0, 30.0, 20, 8, 0.5);
        let both = frame_semantic_score(&[r, r2], &spec);
        let sep = frame_semantic_score(&[r], &spec) + frame_semantic_score(&[r2], &spec);
        assert!((both - sep).abs() < 1e-12);
    }

    #[test]
    fn series_checks_length_and_is_pure() {
        let spec = GaussianSpec::for_frame(DIMS);
        assert!(matches!(score_series(&[vec![]], 2, &spec), Err(Error::LengthMismatch { .. })));
        let labels = vec![vec![], vec![roi(100.0, 50.0, 10, 10, 1.0)], vec![]];
        let a = score_series(&labels, 3, &spec).unwrap();
        assert_eq!(a.scores, vec![0.0, 100.0, 0.0]);
        assert_eq!(a, score_series(&labels, 3, &spec).unwrap());
        let empty = score_series(&[vec![], vec![]], 2, &spec).unwrap();
        assert!(empty.scores.iter().all(|&s| s == 0.0));
    }

    proptest! {
        #[test]
        fn larger_roi_never_scores_less(cx in 20.0f64..180.0, cy in 10.0f64..90.0, w in 2u32..20, grow in 0u32..10, c in 0.0f64..1.0) {
            let spec = GaussianSpec::for_frame(DIMS);
            let small = Roi { x: (cx as u32).saturating_sub(w), y: (cy as u32).saturating_sub(w / 2), w: 2 * w, h: w, confidence: c };
            let big = Roi { x: small.x.saturating_sub(grow), y: small.y.saturating_sub(grow), w: small.w + 2 * grow.min(small.x), h: small.h + 2 * grow.min(small.y), confidence: c };
            // same center only when growth was symmetric
            prop_assume!(big.center() == small.center());
            prop_assert!(frame_semantic_score(&[big], &spec) >= frame_semantic_score(&[small], &spec));
        }

        #[test]
        fn moving_toward_center_never_decreases(x in 0u32..180, y in 0u32..80, t in 0.0f64..1.0) {
            let spec = GaussianSpec::for_frame(DIMS);
            let far = Roi { x, y, w: 20, h: 20, confidence: 0.8 };
            let (fx, fy) = far.center();
            let nx = fx + t * (100.0 - fx);
            let ny = fy + t * (50.0 - fy);
            let near = Roi { x: (nx - 10.0).round() as u32, y: (ny - 10.0).round() as u32, ..far };
            let d = |r: &Roi| { let c = r.center(); (c.0 - 100.0).powi(2) + (c.1 - 50.0).powi(2) };
            prop_assume!(d(&near) <= d(&far));
            prop_assert!(frame_semantic_score(&[near], &spec) >= frame_semantic_score(&[far], &spec));
        }

        #[test]
        fn confidence_scales_linearly(t in 0.0f64..=1.0, x in 0u32..150, y in 0u32..60) {
            let spec = GaussianSpec::for_frame(DIMS);
            let r = Roi { x, y, w: 30, h: 25, confidence: 1.0 };
            let scaled = Roi { confidence: t, ..r };
            let a = frame_semantic_score(&[scaled], &spec);
            let b = t * frame_semantic_score(&[r], &spec);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}
