//! Seeded RANSAC homography estimation with a least-squares refit.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{match_features, FeatureSet, MatchSet};
use crate::error::{Error, Result};
use crate::geometry::{Homography, Mat3, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    pub threshold_px: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Target probability of drawing at least one all-inlier sample; stops
    /// early once reached.
    pub confidence: f64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            threshold_px: 3.0,
            max_iters: 2000,
            seed: 17,
            confidence: 0.995,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    /// Maps `a` points onto `b` points.
    pub h: Homography,
    pub inliers: usize,
    pub inlier_mask: Vec<bool>,
}

pub fn estimate_homography_ransac(
    matches: &MatchSet,
    a_points: &[Point],
    b_points: &[Point],
    cfg: &RansacConfig,
) -> Result<RansacResult> {
    let n = matches.len();
    if n < 4 {
        return Err(Error::TooFewMatches(n));
    }
    let src: Vec<Point> = matches.pairs.iter().map(|m| a_points[m.a]).collect();
    let dst: Vec<Point> = matches.pairs.iter().map(|m| b_points[m.b]).collect();
    ransac_points(&src, &dst, cfg)
}

/// RANSAC over already paired points.
pub fn ransac_points(src: &[Point], dst: &[Point], cfg: &RansacConfig) -> Result<RansacResult> {
    let n = src.len();
    if n < 4 {
        return Err(Error::TooFewMatches(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let thr2 = cfg.threshold_px * cfg.threshold_px;

    let mut best: Option<(Mat3, usize)> = None;
    let mut needed = cfg.max_iters;
    let mut iter = 0;
    while iter < needed.min(cfg.max_iters) {
        iter += 1;
        let sample = draw4(&mut rng, n);
        let s = sample.map(|i| src[i]);
        let d = sample.map(|i| dst[i]);
        if degenerate(&s) || degenerate(&d) {
            continue;
        }
        let Some(m) = fit_homography(&s, &d) else {
            continue;
        };
        let count = count_inliers(&m, src, dst, thr2);
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((m, count));
            let ratio = count as f64 / n as f64;
            needed = adaptive_iterations(ratio, cfg.confidence, cfg.max_iters);
        }
    }
    let (model, _) = best.ok_or(Error::DegenerateConfiguration)?;

    let mask = inlier_mask(&model, src, dst, thr2);
    let (cs, cd): (Vec<Point>, Vec<Point>) = mask
        .iter()
        .enumerate()
        .filter(|(_, &v)| v)
        .map(|(i, _)| (src[i], dst[i]))
        .unzip();
    let model = fit_homography(&cs, &cd).unwrap_or(model);
    let inlier_mask = inlier_mask(&model, src, dst, thr2);
    let inliers = inlier_mask.iter().filter(|&&v| v).count();
    let h = Homography::new(model)?;
    Ok(RansacResult { h, inliers, inlier_mask })
}

/// `R(a, b)`: RANSAC inliers of the homography from `a` to `b`, or 0 when any
/// stage degenerates.
pub fn inlier_score(a: &FeatureSet, b: &FeatureSet, cfg: &RansacConfig) -> usize {
    let matches = match_features(a, b);
    estimate_homography_ransac(&matches, &a.keypoints, &b.keypoints, cfg)
        .map(|r| r.inliers)
        .unwrap_or(0)
}

fn draw4(rng: &mut ChaCha8Rng, n: usize) -> [usize; 4] {
    let mut out = [0usize; 4];
    let mut k = 0;
    while k < 4 {
        let c = rng.gen_range(0..n);
        if !out[..k].contains(&c) {
            out[k] = c;
            k += 1;
        }
    }
    out
}

fn adaptive_iterations(inlier_ratio: f64, confidence: f64, max_iters: usize) -> usize {
    let p_good = inlier_ratio.powi(4);
    if p_good >= 1.0 - 1e-12 {
        return 1;
    }
    if p_good <= 0.0 {
        return max_iters;
    }
    let k = (1.0 - confidence).ln() / (1.0 - p_good).ln();
    if k.is_finite() {
        (k.ceil() as usize).clamp(1, max_iters)
    } else {
        max_iters
    }
}

/// Any three of the four points (nearly) collinear.
fn degenerate(p: &[Point; 4]) -> bool {
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    TRIPLES.iter().any(|t| {
        let (a, b, c) = (p[t[0]], p[t[1]], p[t[2]]);
        let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        cross.abs() < 1.0
    })
}

fn count_inliers(m: &Mat3, src: &[Point], dst: &[Point], thr2: f64) -> usize {
    src.iter()
        .zip(dst)
        .filter(|(s, d)| reproj_err2(m, **s, **d) < thr2)
        .count()
}

fn inlier_mask(m: &Mat3, src: &[Point], dst: &[Point], thr2: f64) -> Vec<bool> {
    src.iter().zip(dst).map(|(s, d)| reproj_err2(m, *s, *d) < thr2).collect()
}

#[inline]
fn reproj_err2(m: &Mat3, s: Point, d: Point) -> f64 {
    match m.apply(s.x, s.y) {
        Some((x, y)) => (x - d.x) * (x - d.x) + (y - d.y) * (y - d.y),
        None => f64::INFINITY,
    }
}

/// Similarity normalization moving the centroid to the origin with mean
/// distance √2.
fn normalizer(pts: &[Point]) -> Option<Mat3> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let md = pts.iter().map(|p| ((p.x - cx).powi(2) + (p.y - cy).powi(2)).sqrt()).sum::<f64>() / n;
    if md < 1e-9 {
        return None;
    }
    let s = core::f64::consts::SQRT_2 / md;
    Some(Mat3([[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]]))
}

/// Normalized DLT with `h33 = 1`: exact solve for four points, normal
/// equations otherwise.
pub fn fit_homography(src: &[Point], dst: &[Point]) -> Option<Mat3> {
    if src.len() < 4 || src.len() != dst.len() {
        return None;
    }
    let ts = normalizer(src)?;
    let td = normalizer(dst)?;
    let norm = |t: &Mat3, p: Point| {
        let (x, y) = t.apply(p.x, p.y).unwrap();
        (x, y)
    };
    let rows = src.iter().zip(dst).flat_map(|(s, d)| {
        let (x, y) = norm(&ts, *s);
        let (u, v) = norm(&td, *d);
        [
            ([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y], u),
            ([0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y], v),
        ]
    });

    let mut a = [[0.0f64; 8]; 8];
    let mut b = [0.0f64; 8];
    if src.len() == 4 {
        for (r, (row, rhs)) in rows.enumerate() {
            a[r] = row;
            b[r] = rhs;
        }
    } else {
        for (row, rhs) in rows {
            for i in 0..8 {
                for j in 0..8 {
                    a[i][j] += row[i] * row[j];
                }
                b[i] += row[i] * rhs;
            }
        }
    }
    let h = solve8(a, b)?;
    let hn = Mat3([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]);
    let m = td.inverse()? * hn * ts;
    if !m.is_finite() || m.inverse().is_none() {
        return None;
    }
    Some(m)
}

fn solve8(mut a: [[f64; 8]; 8], mut b: [f64; 8]) -> Option<[f64; 8]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..8 {
        let piv = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..8 {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..8 {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; 8];
    for r in (0..8).rev() {
        let mut acc = b[r];
        for c in r + 1..8 {
            acc -= a[r][c] * x[c];
        }
        x[r] = acc / a[r][r];
    }
    Some(x)
}

/// Matched keypoint pairs as parallel point lists; helper for callers that
/// already hold feature sets.
pub fn matched_points(matches: &MatchSet, a: &FeatureSet, b: &FeatureSet) -> (Vec<Point>, Vec<Point>) {
    matches.pairs.iter().map(|m| (a.keypoints[m.a], b.keypoints[m.b])).unzip()
}
