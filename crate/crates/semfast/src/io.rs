//! On-disk formats for frames, labels and every pipeline artifact.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use semfast_core::eval::MetricsReport;
use semfast_core::sampler::SamplingResult;
use semfast_core::segment::Segment;
use semfast_core::stabilize::FrameOutcome;
use semfast_core::{Dims, Frame, FrameSequence, Roi};

use crate::costs::DenseCosts;
use crate::error::{Error, IoContext, Result};

/// Trailing run of ASCII digits in a file stem.
pub fn numeric_index(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits: String = stem
        .chars()
        .rev()
        .take_while(char::is_ascii_digit)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().ok()
}

fn decode(path: &Path, index: usize) -> Result<Frame> {
    let img = image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (w, h) = (img.width(), img.height());
    let frame = match img {
        DynamicImage::ImageLuma8(g) => Frame::from_gray(index, w, h, g.into_raw()),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            Frame::from_gray(index, w, h, img.to_luma8().into_raw())
        }
        other => Frame::from_rgb(index, w, h, other.to_rgb8().into_raw()),
    };
    Ok(frame?)
}

/// Loads every file in `dir` matching `pattern`, ordered by the number in
/// its name. Frames are re-indexed from 0 and keep the file number as
/// `source_index`.
pub fn load_image_sequence(dir: &Path, pattern: &str) -> Result<FrameSequence> {
    let full = dir.join(pattern);
    let full = full.to_string_lossy();
    let paths = glob::glob(&full).map_err(|e| Error::Config(format!("bad pattern {pattern}: {e}")))?;
    let mut files: Vec<(u64, PathBuf)> = Vec::new();
    for p in paths {
        let p = p.map_err(|e| Error::Io {
            path: e.path().to_path_buf(),
            source: e.into(),
        })?;
        if !p.is_file() {
            continue;
        }
        let n = numeric_index(&p).ok_or_else(|| Error::Parse {
            path: p.clone(),
            line: 0,
            message: "file name carries no frame number".into(),
        })?;
        files.push((n, p));
    }
    if files.is_empty() {
        return Err(Error::EmptySequence(full.into_owned()));
    }
    files.sort();
    if let Some(w) = files.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Parse {
            path: w[1].1.clone(),
            line: 0,
            message: format!("frame number {} appears twice", w[1].0),
        });
    }
    let mut frames = Vec::with_capacity(files.len());
    for (k, (n, p)) in files.iter().enumerate() {
        let f = decode(p, k)?.with_source_index(*n);
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if f.dims() != first.dims() {
                return Err(Error::DimensionMismatch {
                    path: p.clone(),
                    expected: (first.width(), first.height()),
                    found: (f.width(), f.height()),
                });
            }
        }
        frames.push(f);
    }
    Ok(FrameSequence::new(frames, 30.0)?)
}

pub fn frame_file_name(stem: &str, k: usize) -> String {
    format!("{stem}_{k:06}.png")
}

/// Writes frames as `<stem>_<k>.png`, numbered by position.
pub fn write_image_sequence(dir: &Path, stem: &str, frames: &[Frame]) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    for (k, f) in frames.iter().enumerate() {
        let path = dir.join(frame_file_name(stem, k));
        let (data, color) = match f.color() {
            Some(c) => (c, ColorType::Rgb8),
            None => (f.gray(), ColorType::L8),
        };
        image::save_buffer_with_format(&path, data, f.width(), f.height(), color, ImageFormat::Png).map_err(
            |e| Error::Decode {
                path: path.clone(),
                message: e.to_string(),
            },
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub frame: usize,
    pub rois: Vec<Roi>,
}

/// Reads JSON Lines ROI labels into one list per frame.
pub fn load_roi_labels(path: &Path, n_frames: usize, dims: Dims) -> Result<Vec<Vec<Roi>>> {
    let file = File::open(path).at(path)?;
    let mut labels = vec![Vec::new(); n_frames];
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.at(path)?;
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LabelRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        if rec.frame >= n_frames {
            return Err(Error::OutOfRangeFrame {
                path: path.to_path_buf(),
                line: lineno,
                frame: rec.frame,
                n_frames,
            });
        }
        for r in &rec.rois {
            r.validate(dims, rec.frame).map_err(|source| Error::InvalidRoi {
                path: path.to_path_buf(),
                line: lineno,
                source,
            })?;
        }
        labels[rec.frame].extend(rec.rois);
    }
    Ok(labels)
}

/// Writes one record per frame that has ROIs.
pub fn write_roi_labels(path: &Path, labels: &[Vec<Roi>]) -> Result<()> {
    let mut out = String::new();
    for (frame, rois) in labels.iter().enumerate().filter(|(_, r)| !r.is_empty()) {
        let rec = LabelRecord {
            frame,
            rois: rois.clone(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("label records serialize"));
        out.push('\n');
    }
    write_text(path, &out)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).at(dir)?;
    }
    fs::write(path, text).at(path)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).at(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    write_text(path, &s)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_scores(path: &Path, scores: &[f64]) -> Result<()> {
    let mut s = String::from("frame,score\n");
    for (k, v) in scores.iter().enumerate() {
        s.push_str(&format!("{k},{v}\n"));
    }
    write_text(path, &s)
}

pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let bad = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "frame,score" => {}
        _ => return Err(bad(1, "expected header `frame,score`".into())),
    }
    let mut scores = Vec::new();
    for (k, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let (f, s) = line.split_once(',').ok_or_else(|| bad(k + 1, "expected two columns".into()))?;
        let f: usize = f.trim().parse().map_err(|e| bad(k + 1, format!("frame: {e}")))?;
        if f != scores.len() {
            return Err(bad(k + 1, format!("expected frame {}, found {f}", scores.len())));
        }
        let s: f64 = s.trim().parse().map_err(|e| bad(k + 1, format!("score: {e}")))?;
        scores.push(s);
    }
    Ok(scores)
}

/// Segmentation artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentsFile {
    pub threshold: f64,
    pub degenerate: bool,
    pub min_len: usize,
    pub segments: Vec<Segment>,
}

/// Speed-up plan artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    #[serde(rename = "F_d")]
    pub f_d: u32,
    #[serde(rename = "F_s")]
    pub f_s: u32,
    #[serde(rename = "F_ns")]
    pub f_ns: u32,
    pub residual: f64,
    pub segments: Vec<Segment>,
}

pub fn write_index_file(path: &Path, indices: &[usize]) -> Result<()> {
    let s: String = indices.iter().map(|i| format!("{i}\n")).collect();
    write_text(path, &s)
}

pub fn read_index_file(path: &Path) -> Result<Vec<usize>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.trim().parse().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message: format!("{e}"),
            })
        })
        .collect()
}

pub fn write_sampling(json: &Path, index: &Path, result: &SamplingResult) -> Result<()> {
    write_json(json, result)?;
    write_index_file(index, &result.selected)
}

pub fn write_outcomes(path: &Path, outcomes: &[FrameOutcome]) -> Result<()> {
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&serde_json::to_string(o).expect("outcomes serialize"));
        s.push('\n');
    }
    write_text(path, &s)
}

pub fn read_outcomes(path: &Path) -> Result<Vec<FrameOutcome>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

pub const METRICS_CSV_HEADER: &str = "achieved_speedup,semantic_content,instability,buffer_size,n_frames";

pub fn metrics_csv_row(m: &MetricsReport) -> String {
    format!(
        "{},{},{},{},{}",
        m.achieved_speedup, m.semantic_content, m.instability.index, m.instability.buffer_size, m.instability.n_frames
    )
}

pub fn write_metrics(json: &Path, csv: &Path, m: &MetricsReport) -> Result<()> {
    write_json(json, m)?;
    write_text(csv, &format!("{METRICS_CSV_HEADER}\n{}\n", metrics_csv_row(m)))
}

const CACHE_MAGIC: &[u8; 8] = b"SFCOST01";

/// Binary cost cache: magic, `N` and `τ_max` as little-endian u64, then
/// `(I, V, A)` as little-endian f32 for every `(i, i+k)` with `k ≤ τ_max`
/// and `i + k < N`, row by row.
pub fn write_cost_cache(path: &Path, costs: &DenseCosts) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).at(dir)?;
    }
    let mut w = BufWriter::new(File::create(path).at(path)?);
    w.write_all(CACHE_MAGIC).at(path)?;
    w.write_all(&(costs.n() as u64).to_le_bytes()).at(path)?;
    w.write_all(&(costs.tau_max() as u64).to_le_bytes()).at(path)?;
    for t in costs.raw() {
        for v in t {
            w.write_all(&v.to_le_bytes()).at(path)?;
        }
    }
    w.flush().at(path)
}

pub fn read_cost_cache(path: &Path) -> Result<DenseCosts> {
    let mut bytes = Vec::new();
    File::open(path).at(path)?.read_to_end(&mut bytes).at(path)?;
    let bad = |message: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: message.into(),
    };
    if bytes.len() < 24 || &bytes[..8] != CACHE_MAGIC {
        return Err(bad("not a cost cache"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap()) as usize;
    let (n, tau_max) = (word(8), word(16));
    let body = &bytes[24..];
    let expected = DenseCosts::pair_count(n, tau_max) * 12;
    if body.len() != expected {
        return Err(bad("cost cache length does not match its header"));
    }
    let data = body
        .chunks_exact(12)
        .map(|c| {
            let f = |k: usize| f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().unwrap());
            [f(0), f(1), f(2)]
        })
        .collect();
    Ok(DenseCosts::from_raw(n, tau_max, data))
}
