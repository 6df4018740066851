//! Corner detection, patch descriptors and brute-force matching.
//!
//! Any detector producing fixed-length descriptors compared by L2 distance can
//! stand in for [`HarrisDetector`] through [`FeatureDetector`]; matching and
//! RANSAC only see keypoints and descriptors.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::frame::GrayView;
use crate::geometry::Point;

pub const PATCH: usize = 8;
pub const DESCRIPTOR_LEN: usize = PATCH * PATCH;

pub type Descriptor = [f32; DESCRIPTOR_LEN];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureSet {
    pub keypoints: Vec<Point>,
    pub responses: Vec<f32>,
    pub descriptors: Vec<Descriptor>,
}

impl FeatureSet {
    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

/// One-to-one correspondences between two feature sets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchSet {
    pub pairs: Vec<Match>,
}

impl MatchSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Keeps pairs whose descriptor distance is at most `max_distance`.
    pub fn gated(mut self, max_distance: f64) -> MatchSet {
        self.pairs.retain(|m| m.distance <= max_distance);
        self
    }

    /// Matched point pairs `(a, b)`.
    pub fn points(&self, a: &FeatureSet, b: &FeatureSet) -> Vec<(Point, Point)> {
        self.pairs
            .iter()
            .map(|m| (a.keypoints[m.a], b.keypoints[m.b]))
            .collect()
    }
}

pub trait FeatureDetector {
    /// Detects features; pixels with `mask[i] == false` are never sampled.
    fn detect(&self, image: GrayView<'_>, mask: Option<&[bool]>) -> FeatureSet;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    pub max_features: usize,
    /// Harris sensitivity `k` in `det − k·trace²`.
    pub harris_k: f32,
    /// Responses below this fraction of the frame maximum are discarded.
    pub relative_threshold: f32,
    pub min_response: f32,
    pub nms_radius: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            max_features: 96,
            harris_k: 0.04,
            relative_threshold: 0.01,
            min_response: 100.0,
            nms_radius: 3,
        }
    }
}

/// Harris corners with an 8×8 zero-mean, unit-norm intensity patch
/// descriptor.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HarrisDetector {
    pub cfg: DetectorConfig,
}

impl HarrisDetector {
    pub fn new(cfg: DetectorConfig) -> Self {
        HarrisDetector { cfg }
    }
}

// keeps the bilinear descriptor support inside the image
const BORDER: usize = PATCH / 2 + 2;

impl FeatureDetector for HarrisDetector {
    fn detect(&self, image: GrayView<'_>, mask: Option<&[bool]>) -> FeatureSet {
        let (w, h) = (image.width, image.height);
        if w <= 2 * BORDER || h <= 2 * BORDER {
            return FeatureSet::default();
        }
        let response = harris_response(image, self.cfg.harris_k);
        let peak = response.iter().copied().fold(0.0f32, f32::max);
        let floor = self.cfg.min_response.max(self.cfg.relative_threshold * peak);
        if peak <= floor {
            return FeatureSet::default();
        }

        let r = self.cfg.nms_radius as isize;
        let mut corners: Vec<(f32, usize, usize)> = Vec::new();
        for y in BORDER..h - BORDER {
            for x in BORDER..w - BORDER {
                let v = response[y * w + x];
                if v <= floor {
                    continue;
                }
                let mut is_max = true;
                'win: for dy in -r..=r {
                    for dx in -r..=r {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (qx, qy) = (x as isize + dx, y as isize + dy);
                        if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                            continue;
                        }
                        let q = response[qy as usize * w + qx as usize];
                        // plateaus keep their first pixel in raster order
                        let earlier = dy < 0 || (dy == 0 && dx < 0);
                        if q > v || (q == v && earlier) {
                            is_max = false;
                            break 'win;
                        }
                    }
                }
                if is_max {
                    corners.push((v, x, y));
                }
            }
        }
        corners.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

        let mut out = FeatureSet::default();
        for (v, x, y) in corners {
            if out.len() >= self.cfg.max_features {
                break;
            }
            let p = refine(&response, w, x, y);
            if let Some(m) = mask {
                if !support_valid(m, w, h, p) {
                    continue;
                }
            }
            if let Some(d) = describe(image, p) {
                out.keypoints.push(p);
                out.responses.push(v);
                out.descriptors.push(d);
            }
        }
        out
    }
}

fn harris_response(image: GrayView<'_>, k: f32) -> Vec<f32> {
    let (w, h) = (image.width, image.height);
    let mut ixx = vec![0f32; w * h];
    let mut iyy = vec![0f32; w * h];
    let mut ixy = vec![0f32; w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| image.at((x as isize + dx) as usize, (y as isize + dy) as usize) as f32;
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1) - p(-1, -1) - 2.0 * p(-1, 0) - p(-1, 1)) / 8.0;
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1) - p(-1, -1) - 2.0 * p(0, -1) - p(1, -1)) / 8.0;
            let i = y * w + x;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let sxx = binomial5(&ixx, w, h);
    let syy = binomial5(&iyy, w, h);
    let sxy = binomial5(&ixy, w, h);
    sxx.iter()
        .zip(&syy)
        .zip(&sxy)
        .map(|((&a, &b), &c)| a * b - c * c - k * (a + b) * (a + b))
        .collect()
}

/// Separable [1 4 6 4 1]/16 smoothing with zero padding.
fn binomial5(src: &[f32], w: usize, h: usize) -> Vec<f32> {
    const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let mut tmp = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, kv) in K.iter().enumerate() {
                let xx = x as isize + t as isize - 2;
                if xx >= 0 && (xx as usize) < w {
                    acc += kv * src[y * w + xx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (t, kv) in K.iter().enumerate() {
                let yy = y as isize + t as isize - 2;
                if yy >= 0 && (yy as usize) < h {
                    acc += kv * tmp[yy as usize * w + x];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Sub-pixel peak by a parabola through the response along each axis.
fn refine(r: &[f32], w: usize, x: usize, y: usize) -> Point {
    let at = |x: usize, y: usize| r[y * w + x] as f64;
    let offset = |l: f64, c: f64, rr: f64| {
        let den = l - 2.0 * c + rr;
        if den.abs() < 1e-12 {
            0.0
        } else {
            (0.5 * (l - rr) / den).clamp(-0.5, 0.5)
        }
    };
    let dx = offset(at(x - 1, y), at(x, y), at(x + 1, y));
    let dy = offset(at(x, y - 1), at(x, y), at(x, y + 1));
    Point::new(x as f64 + dx, y as f64 + dy)
}

fn support_valid(mask: &[bool], w: usize, h: usize, p: Point) -> bool {
    let reach = PATCH as f64 / 2.0 + 1.0;
    let x0 = (p.x - reach).floor().max(0.0) as usize;
    let y0 = (p.y - reach).floor().max(0.0) as usize;
    let x1 = ((p.x + reach).ceil() as usize).min(w - 1);
    let y1 = ((p.y + reach).ceil() as usize).min(h - 1);
    (y0..=y1).all(|y| mask[y * w + x0..=y * w + x1].iter().all(|&v| v))
}

fn describe(image: GrayView<'_>, p: Point) -> Option<Descriptor> {
    let mut d = [0f32; DESCRIPTOR_LEN];
    let half = (PATCH as f64 - 1.0) / 2.0;
    for j in 0..PATCH {
        for i in 0..PATCH {
            let sx = p.x - half + i as f64;
            let sy = p.y - half + j as f64;
            d[j * PATCH + i] = bilinear(image, sx, sy) as f32;
        }
    }
    let mean = d.iter().sum::<f32>() / DESCRIPTOR_LEN as f32;
    let mut norm = 0.0;
    for v in d.iter_mut() {
        *v -= mean;
        norm += *v * *v;
    }
    let norm = norm.sqrt();
    if norm < 1e-3 {
        return None;
    }
    for v in d.iter_mut() {
        *v /= norm;
    }
    Some(d)
}

fn bilinear(image: GrayView<'_>, x: f64, y: f64) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let (xi, yi) = (x0 as usize, y0 as usize);
    let xj = (xi + 1).min(image.width - 1);
    let yj = (yi + 1).min(image.height - 1);
    let p00 = image.at(xi, yi) as f64;
    let p10 = image.at(xj, yi) as f64;
    let p01 = image.at(xi, yj) as f64;
    let p11 = image.at(xj, yj) as f64;
    (p00 * (1.0 - fx) + p10 * fx) * (1.0 - fy) + (p01 * (1.0 - fx) + p11 * fx) * fy
}

#[inline]
fn dist2(a: &Descriptor, b: &Descriptor) -> f32 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exhaustive nearest neighbours kept only when mutually best.
pub fn match_features(a: &FeatureSet, b: &FeatureSet) -> MatchSet {
    if a.is_empty() || b.is_empty() {
        return MatchSet::default();
    }
    let mut best_for_b = vec![(f32::INFINITY, usize::MAX); b.len()];
    let mut best_for_a = vec![(f32::INFINITY, usize::MAX); a.len()];
    for (i, da) in a.descriptors.iter().enumerate() {
        for (j, db) in b.descriptors.iter().enumerate() {
            let d = dist2(da, db);
            if d < best_for_a[i].0 {
                best_for_a[i] = (d, j);
            }
            if d < best_for_b[j].0 {
                best_for_b[j] = (d, i);
            }
        }
    }
    let pairs = best_for_a
        .iter()
        .enumerate()
        .filter(|(i, (_, j))| *j != usize::MAX && best_for_b[*j].1 == *i)
        .map(|(i, &(d, j))| Match {
            a: i,
            b: j,
            distance: (d as f64).max(0.0).sqrt(),
        })
        .collect();
    MatchSet { pairs }
}
