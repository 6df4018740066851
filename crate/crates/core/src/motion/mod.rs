//! Geometric and photometric primitives behind the transition costs and the
//! stabilizer.

pub mod cost;
pub mod emd;
pub mod features;
pub mod foe;
pub mod ransac;

pub use cost::{
    flow_magnitudes, foe_cost, instability_cost, velocity_cost, CostModel, CostTerms, FlowMagnitudes, MotionConfig,
};
pub use emd::emd_1d;
pub use features::{
    match_features, DetectorConfig, FeatureDetector, FeatureSet, HarrisDetector, Match, MatchSet,
};
pub use foe::{estimate_foe, FlowVector, FoeEstimate};
pub use ransac::{estimate_homography_ransac, inlier_score, RansacConfig, RansacResult};
