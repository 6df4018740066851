//! Parallel evaluation of every transition cost the sampler may need.

use rayon::prelude::*;

use semfast_core::frame::color_histogram;
use semfast_core::motion::{CostModel, CostTerms, MotionConfig};
use semfast_core::sampler::CostProvider;
use semfast_core::segment::Segment;
use semfast_core::FrameSequence;

use crate::error::Result;

/// Precomputed `(I, V, A)` for every pair `(i, i+k)`, `1 ≤ k ≤ τ_max`.
///
/// The velocity term is evaluated at the speed-up of the segment holding
/// `i`; the sampler only asks for pairs inside one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseCosts {
    n: usize,
    tau_max: usize,
    offsets: Vec<usize>,
    data: Vec<[f32; 3]>,
}

impl DenseCosts {
    pub fn pair_count(n: usize, tau_max: usize) -> usize {
        (0..n).map(|i| tau_max.min(n - 1 - i)).sum()
    }

    fn offsets(n: usize, tau_max: usize) -> Vec<usize> {
        let mut o = Vec::with_capacity(n + 1);
        o.push(0);
        for i in 0..n {
            o.push(o[i] + tau_max.min(n - 1 - i));
        }
        o
    }

    pub fn from_raw(n: usize, tau_max: usize, data: Vec<[f32; 3]>) -> Self {
        let offsets = Self::offsets(n, tau_max);
        assert_eq!(data.len(), offsets[n], "cost data length");
        DenseCosts {
            n,
            tau_max,
            offsets,
            data,
        }
    }

    /// Evaluates all pairs with `rayon`; results do not depend on the
    /// thread count.
    pub fn compute(model: &CostModel, segments: &[Segment], tau_max: usize) -> Self {
        let n = model.len();
        let mut speedup = vec![1u32; n];
        for s in segments {
            for f in s.start..=s.end.min(n.saturating_sub(1)) {
                speedup[f] = s.speedup;
            }
        }
        let rows: Vec<Vec<[f32; 3]>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..=(i + tau_max).min(n - 1))
                    .map(|j| {
                        let t = model.terms(i, j, speedup[i]);
                        [t.instability as f32, t.velocity as f32, t.appearance as f32]
                    })
                    .collect()
            })
            .collect();
        Self::from_raw(n, tau_max, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    pub fn raw(&self) -> &[[f32; 3]] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Option<[f32; 3]> {
        if i >= j || j >= self.n || j - i > self.tau_max {
            return None;
        }
        Some(self.data[self.offsets[i] + (j - i - 1)])
    }
}

impl CostProvider for DenseCosts {
    fn terms(&self, i: usize, j: usize, _speedup: u32) -> CostTerms {
        let [a, b, c] = self.get(i, j).expect("pair within the cached range");
        CostTerms {
            instability: a as f64,
            velocity: b as f64,
            appearance: c as f64,
        }
    }
}

/// Builds the per-frame measurements in parallel.
pub fn cost_model(seq: &FrameSequence, cfg: &MotionConfig) -> Result<CostModel> {
    let features = seq.frames().par_iter().map(|f| cfg.features(f)).collect();
    let histograms = seq
        .frames()
        .par_iter()
        .map(|f| color_histogram(f, cfg.histogram_bins))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(CostModel::from_parts(features, histograms, seq.dims(), cfg))
}
