//! Pipeline stages. Each reads its inputs from files and writes its
//! artifacts, so running them one by one matches [`pipeline`] byte for byte.

use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use semfast_core::eval::{
    achieved_speedup, generate_synthetic_scene, instability_index, semantic_content, MetricsReport,
    SyntheticSceneSpec,
};
use semfast_core::planner::{assign_segment_speedups, estimate_speedups};
use semfast_core::sampler::{sample_video, SamplingResult};
use semfast_core::segment::{class_lengths, otsu_threshold, segment_by_threshold};
use semfast_core::semantic::score_series;
use semfast_core::stabilize::{stabilize as run_stabilizer, Stabilized};
use semfast_core::{FrameSequence, Homography};

use crate::config::PipelineConfig;
use crate::costs::{cost_model, DenseCosts};
use crate::error::{Error, Result};
use crate::io::{
    load_image_sequence, load_roi_labels, read_cost_cache, read_index_file, read_json, read_scores,
    write_cost_cache, write_image_sequence, write_index_file, write_json, write_metrics, write_outcomes,
    write_roi_labels, write_sampling, write_scores, PlanFile, SegmentsFile,
};

/// File names inside a run directory.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn scores(&self) -> PathBuf {
        self.root.join("scores.csv")
    }
    pub fn segments(&self) -> PathBuf {
        self.root.join("segments.json")
    }
    pub fn plan(&self) -> PathBuf {
        self.root.join("plan.json")
    }
    pub fn costs(&self) -> PathBuf {
        self.root.join("costs.bin")
    }
    pub fn sampling(&self) -> PathBuf {
        self.root.join("sampling.json")
    }
    pub fn selection(&self) -> PathBuf {
        self.root.join("selected.txt")
    }
    pub fn sampled(&self) -> PathBuf {
        self.root.join("sampled")
    }
    pub fn stabilized(&self) -> PathBuf {
        self.root.join("stabilized")
    }
    pub fn stabilized_sources(&self) -> PathBuf {
        self.root.join("stabilized.txt")
    }
    pub fn outcomes(&self) -> PathBuf {
        self.root.join("outcomes.jsonl")
    }
    pub fn metrics_json(&self) -> PathBuf {
        self.root.join("metrics.json")
    }
    pub fn metrics_csv(&self) -> PathBuf {
        self.root.join("metrics.csv")
    }
}

fn frames(dir: &Path, cfg: &PipelineConfig) -> Result<FrameSequence> {
    load_image_sequence(dir, &cfg.pattern)
}

/// Semantic score of every frame, written as `frame,score` CSV.
pub fn score(frames_dir: &Path, labels: &Path, out: &Path, cfg: &PipelineConfig) -> Result<Vec<f64>> {
    let seq = frames(frames_dir, cfg)?;
    let rois = load_roi_labels(labels, seq.len(), seq.dims())?;
    let profile = score_series(&rois, seq.len(), &cfg.gaussian(seq.dims())?)?;
    write_scores(out, &profile.scores)?;
    info!("scored {} frames, mean {:.3}", seq.len(), profile.mean());
    Ok(profile.scores)
}

/// Otsu split of the score series into semantic and non-semantic runs.
pub fn segment(scores: &Path, out: &Path, cfg: &PipelineConfig) -> Result<SegmentsFile> {
    let s = read_scores(scores)?;
    let t = otsu_threshold(&s, cfg.otsu_bins)?;
    let segments = segment_by_threshold(&s, t.value, cfg.min_segment);
    let file = SegmentsFile {
        threshold: t.value,
        degenerate: t.degenerate,
        min_len: cfg.min_segment,
        segments,
    };
    write_json(out, &file)?;
    let (ls, lns) = class_lengths(&file.segments);
    info!("threshold {:.3}: {ls} semantic, {lns} non-semantic frames", t.value);
    Ok(file)
}

/// Chooses the two playback rates and tags every segment with its rate.
pub fn plan(segments: &Path, out: &Path, cfg: &PipelineConfig) -> Result<PlanFile> {
    let seg: SegmentsFile = read_json(segments)?;
    let (ls, lns) = class_lengths(&seg.segments);
    let p = estimate_speedups(ls, lns, cfg.speedup, &cfg.planner())?;
    let file = PlanFile {
        f_d: p.f_d,
        f_s: p.f_s,
        f_ns: p.f_ns,
        residual: p.residual,
        segments: assign_segment_speedups(&seg.segments, &p),
    };
    write_json(out, &file)?;
    info!("F_s = {}, F_ns = {}", p.f_s, p.f_ns);
    Ok(file)
}

/// Output paths of the sampling stage.
#[derive(Debug, Clone)]
pub struct SampleOutputs {
    pub costs: PathBuf,
    pub sampling: PathBuf,
    pub selection: PathBuf,
    /// Where to write the selected frames as images, if anywhere.
    pub frames: Option<PathBuf>,
    /// Load `costs` instead of recomputing when it matches the video and
    /// `τ_max`. The cache does not record the speed-ups it was built with.
    pub reuse_costs: bool,
}

/// Shortest-path frame selection.
pub fn sample(
    frames_dir: &Path,
    scores: &Path,
    plan: &Path,
    out: &SampleOutputs,
    cfg: &PipelineConfig,
) -> Result<SamplingResult> {
    let seq = frames(frames_dir, cfg)?;
    let s = read_scores(scores)?;
    let p: PlanFile = read_json(plan)?;
    if s.len() != seq.len() {
        return Err(semfast_core::Error::LengthMismatch {
            expected: seq.len(),
            found: s.len(),
        }
        .into());
    }
    let cached = out.reuse_costs.then(|| read_cost_cache(&out.costs).ok()).flatten();
    let costs = match cached {
        Some(c) if c.n() == seq.len() && c.tau_max() == cfg.tau_max => {
            info!("reusing cost cache {}", out.costs.display());
            c
        }
        _ => {
            let model = cost_model(&seq, &cfg.motion())?;
            let c = DenseCosts::compute(&model, &p.segments, cfg.tau_max);
            write_cost_cache(&out.costs, &c)?;
            c
        }
    };
    let result = sample_video(&p.segments, &s, &costs, &cfg.graph())?;
    write_sampling(&out.sampling, &out.selection, &result)?;
    if let Some(dir) = &out.frames {
        let picked: Vec<_> = result.selected.iter().map(|&k| seq.frames()[k].clone()).collect();
        write_image_sequence(dir, "frame", &picked)?;
    }
    info!(
        "selected {} of {} frames (speed-up {:.2})",
        result.selected.len(),
        seq.len(),
        result.achieved_speedup
    );
    Ok(result)
}

/// Output paths of the stabilization stage.
#[derive(Debug, Clone)]
pub struct StabilizeOutputs {
    pub frames: PathBuf,
    pub sources: PathBuf,
    pub outcomes: PathBuf,
}

pub fn stabilize(
    frames_dir: &Path,
    scores: &Path,
    selection: &Path,
    out: &StabilizeOutputs,
    cfg: &PipelineConfig,
) -> Result<Stabilized> {
    let seq = frames(frames_dir, cfg)?;
    let s = read_scores(scores)?;
    let selected = read_index_file(selection)?;
    let result = run_stabilizer(&seq, &selected, &s, &cfg.stabilizer())?;
    for k in &result.collapsed_patches {
        warn!("patch {k} lost every frame; passed through unstabilized");
    }
    write_image_sequence(&out.frames, "frame", &result.frames)?;
    let sources: Vec<usize> = result.frames.iter().map(|f| f.source_index as usize).collect();
    write_index_file(&out.sources, &sources)?;
    write_outcomes(&out.outcomes, &result.outcomes)?;
    info!("stabilized {} frames", result.frames.len());
    Ok(result)
}

/// Metrics of an output sequence whose frames came from the original
/// frames listed in `sources`.
pub fn evaluate(
    frames_dir: &Path,
    sources: &Path,
    scores: &Path,
    json: &Path,
    csv: &Path,
    cfg: &PipelineConfig,
) -> Result<MetricsReport> {
    let seq = frames(frames_dir, cfg)?;
    let src = read_index_file(sources)?;
    let s = read_scores(scores)?;
    if src.len() != seq.len() {
        return Err(Error::Config(format!(
            "{} lists {} frames but {} holds {}",
            sources.display(),
            src.len(),
            frames_dir.display(),
            seq.len()
        )));
    }
    if let Some(&bad) = src.iter().find(|&&k| k >= s.len()) {
        return Err(Error::Config(format!("source frame {bad} has no score")));
    }
    let report = MetricsReport {
        achieved_speedup: achieved_speedup(s.len(), seq.len())?,
        semantic_content: semantic_content(&src, &s),
        instability: instability_index(seq.frames(), cfg.buffer)?,
    };
    write_metrics(json, csv, &report)?;
    Ok(report)
}

/// Ground truth written next to a synthetic scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub poses: Vec<Homography>,
    pub semantic: Vec<bool>,
}

/// Renders a scene into `out`: frames, `labels.jsonl` and `ground_truth.json`.
pub fn synth(spec: &SyntheticSceneSpec, out: &Path) -> Result<()> {
    let scene = generate_synthetic_scene(spec)?;
    write_image_sequence(out, "frame", scene.frames.frames())?;
    write_roi_labels(&out.join("labels.jsonl"), &scene.labels)?;
    write_json(
        &out.join("ground_truth.json"),
        &GroundTruth {
            poses: scene.poses,
            semantic: scene.semantic,
        },
    )?;
    info!("rendered {} frames into {}", spec.n_frames, out.display());
    Ok(())
}

/// Runs every stage into `run`.
pub fn pipeline(frames_dir: &Path, labels: &Path, run: &RunLayout, cfg: &PipelineConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    score(frames_dir, labels, &run.scores(), cfg)?;
    segment(&run.scores(), &run.segments(), cfg)?;
    plan(&run.segments(), &run.plan(), cfg)?;
    sample(
        frames_dir,
        &run.scores(),
        &run.plan(),
        &SampleOutputs {
            costs: run.costs(),
            sampling: run.sampling(),
            selection: run.selection(),
            frames: Some(run.sampled()),
            reuse_costs: false,
        },
        cfg,
    )?;
    stabilize(
        frames_dir,
        &run.scores(),
        &run.selection(),
        &StabilizeOutputs {
            frames: run.stabilized(),
            sources: run.stabilized_sources(),
            outcomes: run.outcomes(),
        },
        cfg,
    )?;
    evaluate(
        &run.stabilized(),
        &run.stabilized_sources(),
        &run.scores(),
        &run.metrics_json(),
        &run.metrics_csv(),
        cfg,
    )
}
