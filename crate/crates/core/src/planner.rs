//! Discrete allocation of semantic and non-semantic playback rates.
//!
//! Minimizes `D(F_ns, F_s) + λ₁|F_ns − F_s| + λ₂|F_s|` where
//! `D = |(L_s + L_ns)/F_d − (L_s/F_s + L_ns/F_ns)|`, over integer pairs with
//! `1 ≤ F_s ≤ F_d ≤ F_ns ≤ F_max` and `F_s ≤ F_ns`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::segment::{Segment, SegmentKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Search ceiling for `F_ns`; `None` means `10 · F_d`.
    pub f_max: Option<u32>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            lambda1: 0.1,
            lambda2: 1.0,
            f_max: None,
        }
    }
}

impl PlannerConfig {
    pub fn f_max_for(&self, f_d: u32) -> u32 {
        self.f_max.unwrap_or(10 * f_d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpeedupPlan {
    pub f_d: u32,
    pub f_s: u32,
    pub f_ns: u32,
    pub residual: f64,
    pub objective: f64,
}

/// `D(F_ns, F_s)`.
pub fn speedup_residual(l_s: usize, l_ns: usize, f_d: u32, f_s: u32, f_ns: u32) -> f64 {
    let desired = (l_s + l_ns) as f64 / f_d as f64;
    let achieved = l_s as f64 / f_s as f64 + l_ns as f64 / f_ns as f64;
    (desired - achieved).abs()
}

/// Grid scan in `(F_s, F_ns)` lexicographic order with a strict improvement
/// test, which realizes the smaller-`F_s`-then-smaller-`F_ns` tie-break.
pub fn estimate_speedups(l_s: usize, l_ns: usize, f_d: u32, cfg: &PlannerConfig) -> Result<SpeedupPlan> {
    if l_s + l_ns == 0 {
        return Err(Error::InvalidConfig("no frames to plan"));
    }
    if f_d == 0 {
        return Err(Error::InvalidConfig("desired speed-up must be at least 1"));
    }
    if cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0 {
        return Err(Error::InvalidConfig("lambdas must be non-negative"));
    }
    let f_max = cfg.f_max_for(f_d);
    if f_max < f_d {
        return Err(Error::InfeasibleBounds { f_max, f_d });
    }

    let mut best: Option<SpeedupPlan> = None;
    for f_s in 1..=f_d {
        for f_ns in f_d.max(f_s)..=f_max {
            let residual = speedup_residual(l_s, l_ns, f_d, f_s, f_ns);
            let objective = residual + cfg.lambda1 * (f_ns - f_s) as f64 + cfg.lambda2 * f_s as f64;
            if best.map_or(true, |b| objective < b.objective) {
                best = Some(SpeedupPlan {
                    f_d,
                    f_s,
                    f_ns,
                    residual,
                    objective,
                });
            }
        }
    }
    // f_s = 1, f_ns = f_d is always feasible here
    Ok(best.expect("non-empty feasible grid"))
}

pub fn assign_segment_speedups(segments: &[Segment], plan: &SpeedupPlan) -> Vec<Segment> {
    segments
        .iter()
        .map(|s| Segment {
            speedup: match s.kind {
                SegmentKind::Semantic => plan.f_s,
                SegmentKind::NonSemantic => plan.f_ns,
            },
            ..*s
        })
        .collect()
}
