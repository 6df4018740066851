//! Transition cost terms: instability (FOE offset), velocity (flow pace) and
//! appearance (histogram EMD), each scaled to `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::emd::emd_1d;
use super::features::{match_features, DetectorConfig, FeatureDetector, FeatureSet, HarrisDetector};
use super::foe::{estimate_foe, FlowVector, FoeEstimate, FOE_CONDITION_BOUND};
use super::ransac::RansacConfig;
use crate::error::{Error, Result};
use crate::frame::{color_histogram, Dims, Frame, FrameSequence, Histogram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionConfig {
    pub detector: DetectorConfig,
    pub ransac: RansacConfig,
    /// Matches with a larger descriptor distance are ignored for flow.
    pub max_match_distance: f64,
    pub foe_condition_bound: f64,
    pub histogram_bins: usize,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            detector: DetectorConfig::default(),
            ransac: RansacConfig::default(),
            max_match_distance: 0.6,
            foe_condition_bound: FOE_CONDITION_BOUND,
            histogram_bins: 32,
        }
    }
}

impl MotionConfig {
    pub fn detector(&self) -> HarrisDetector {
        HarrisDetector::new(self.detector)
    }

    pub fn features(&self, frame: &Frame) -> FeatureSet {
        self.detector().detect(frame.gray_view(), None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostTerms {
    pub instability: f64,
    pub velocity: f64,
    pub appearance: f64,
}

/// Flow vectors from gated matches between two feature sets.
pub fn matched_flow(a: &FeatureSet, b: &FeatureSet, max_distance: f64) -> Vec<FlowVector> {
    match_features(a, b)
        .gated(max_distance)
        .pairs
        .iter()
        .map(|m| {
            let (p, q) = (a.keypoints[m.a], b.keypoints[m.b]);
            FlowVector {
                origin: p,
                displacement: (q.x - p.x, q.y - p.y),
            }
        })
        .collect()
}

/// FOE distance to the frame center over the half-diagonal, clamped to
/// `[0, 1]`; a failed estimate costs 1.
pub fn foe_cost(foe: &Result<FoeEstimate>, dims: Dims) -> f64 {
    match foe {
        Ok(f) => {
            let (cx, cy) = dims.center();
            let half_diag = (cx * cx + cy * cy).sqrt();
            let d = ((f.point.x - cx).powi(2) + (f.point.y - cy).powi(2)).sqrt();
            (d / half_diag).clamp(0.0, 1.0)
        }
        Err(_) => 1.0,
    }
}

pub fn instability_cost_features(a: &FeatureSet, b: &FeatureSet, dims: Dims, cfg: &MotionConfig) -> f64 {
    let flow = matched_flow(a, b, cfg.max_match_distance);
    foe_cost(&estimate_foe(&flow, cfg.foe_condition_bound), dims)
}

/// `I_{i,j}` for two frames.
pub fn instability_cost(frame_i: &Frame, frame_j: &Frame, cfg: &MotionConfig) -> f64 {
    let a = cfg.features(frame_i);
    let b = cfg.features(frame_j);
    instability_cost_features(&a, &b, frame_i.dims(), cfg)
}

/// `V = |target − mean(magnitudes)| / target`, clamped to `[0, 1]`.
pub fn velocity_cost(magnitudes: &[f64], target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::ZeroTarget);
    }
    let mean = if magnitudes.is_empty() {
        0.0
    } else {
        magnitudes.iter().sum::<f64>() / magnitudes.len() as f64
    };
    Ok(((target - mean).abs() / target).min(1.0))
}

/// Mean flow magnitude between adjacent frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMagnitudes {
    pub values: Vec<f64>,
    /// Pairs with no usable matches, filled with a median of measured pairs.
    pub interpolated: Vec<bool>,
}

impl FlowMagnitudes {
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

pub fn flow_magnitudes_from_features(features: &[FeatureSet], cfg: &MotionConfig) -> FlowMagnitudes {
    let measured: Vec<Option<f64>> = features
        .windows(2)
        .map(|w| {
            let flow = matched_flow(&w[0], &w[1], cfg.max_match_distance);
            (!flow.is_empty()).then(|| {
                flow.iter()
                    .map(|f| (f.displacement.0.powi(2) + f.displacement.1.powi(2)).sqrt())
                    .sum::<f64>()
                    / flow.len() as f64
            })
        })
        .collect();

    let mut all: Vec<f64> = measured.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let fallback = if all.is_empty() { 0.0 } else { median(&all) };

    // running median over pairs measured so far; leading gaps use the
    // median of every measured pair
    let mut seen: Vec<f64> = Vec::new();
    let mut values = Vec::with_capacity(measured.len());
    let mut interpolated = Vec::with_capacity(measured.len());
    for m in measured {
        match m {
            Some(v) => {
                let pos = seen.partition_point(|&x| x < v);
                seen.insert(pos, v);
                values.push(v);
                interpolated.push(false);
            }
            None => {
                values.push(if seen.is_empty() { fallback } else { median(&seen) });
                interpolated.push(true);
            }
        }
    }
    FlowMagnitudes { values, interpolated }
}

pub fn flow_magnitudes(seq: &FrameSequence, cfg: &MotionConfig) -> FlowMagnitudes {
    let features: Vec<FeatureSet> = seq.frames().iter().map(|f| cfg.features(f)).collect();
    flow_magnitudes_from_features(&features, cfg)
}

/// Per-frame measurements shared by every pair cost.
#[derive(Debug, Clone)]
pub struct CostModel {
    pub features: Vec<FeatureSet>,
    pub histograms: Vec<Histogram>,
    pub flow: FlowMagnitudes,
    prefix: Vec<f64>,
    mean_flow: f64,
    dims: Dims,
    cfg: MotionConfig,
}

impl CostModel {
    pub fn new(seq: &FrameSequence, cfg: &MotionConfig) -> Result<Self> {
        let features = seq.frames().iter().map(|f| cfg.features(f)).collect();
        let histograms = seq
            .frames()
            .iter()
            .map(|f| color_histogram(f, cfg.histogram_bins))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(features, histograms, seq.dims(), cfg))
    }

    pub fn from_parts(features: Vec<FeatureSet>, histograms: Vec<Histogram>, dims: Dims, cfg: &MotionConfig) -> Self {
        let flow = flow_magnitudes_from_features(&features, cfg);
        let mut prefix = vec![0.0; flow.values.len() + 1];
        for (k, v) in flow.values.iter().enumerate() {
            prefix[k + 1] = prefix[k] + v;
        }
        let mean_flow = flow.mean();
        CostModel {
            features,
            histograms,
            flow,
            prefix,
            mean_flow,
            dims,
            cfg: *cfg,
        }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Mean adjacent-frame flow magnitude over the whole video.
    pub fn mean_flow(&self) -> f64 {
        self.mean_flow
    }

    /// Sum of adjacent flow magnitudes along `i..j`.
    pub fn flow_between(&self, i: usize, j: usize) -> f64 {
        self.prefix[j] - self.prefix[i]
    }

    /// Cost terms for the transition `i → j` in a segment played at
    /// `speedup`. The velocity target is `speedup` times the mean adjacent
    /// flow; a static video has no target and contributes no velocity cost.
    pub fn terms(&self, i: usize, j: usize, speedup: u32) -> CostTerms {
        let instability = instability_cost_features(&self.features[i], &self.features[j], self.dims, &self.cfg);
        let target = speedup as f64 * self.mean_flow;
        let velocity = velocity_cost(&[self.flow_between(i, j)], target).unwrap_or(0.0);
        let appearance = emd_1d(&self.histograms[i], &self.histograms[j]).unwrap_or(1.0);
        CostTerms {
            instability,
            velocity,
            appearance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn velocity_reference_values() {
        assert_eq!(velocity_cost(&[2.0, 4.0], 3.0).unwrap(), 0.0);
        assert_eq!(velocity_cost(&[6.0], 3.0).unwrap(), 1.0);
        assert_eq!(velocity_cost(&[0.0, 0.0], 3.0).unwrap(), 1.0);
        assert_eq!(velocity_cost(&[9.0], 3.0).unwrap(), 1.0);
        assert_eq!(velocity_cost(&[1.0], 0.0), Err(Error::ZeroTarget));
    }

    #[test]
    fn foe_cost_normalization() {
        let dims = Dims::new(160, 120);
        let at = |x, y| Ok(FoeEstimate { point: Point::new(x, y), residual: 0.0 });
        assert_eq!(foe_cost(&at(80.0, 60.0), dims), 0.0);
        assert_eq!(foe_cost(&at(0.0, 0.0), dims), 1.0);
        assert_eq!(foe_cost(&at(-500.0, 0.0), dims), 1.0);
        assert!((foe_cost(&at(40.0, 30.0), dims) - 0.5).abs() < 1e-12);
        assert_eq!(foe_cost(&Err(Error::IllConditioned), dims), 1.0);
    }
}
