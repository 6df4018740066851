use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semfast::config::parse_lambdas;
use semfast::stages::{self, RunLayout, SampleOutputs, StabilizeOutputs};
use semfast::{Error, PipelineConfig};
use semfast_core::eval::SyntheticSceneSpec;

/// Semantic fast-forward for first-person frame sequences.
#[derive(Parser, Debug)]
#[command(name = "semfast", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every stage; flags override the config file.
#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` settings file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Desired overall speed-up F_d
    #[arg(long, global = true)]
    speedup: Option<u32>,
    /// Stabilizer patch length (power of two)
    #[arg(long, global = true)]
    alpha: Option<usize>,
    /// Longest forward skip in the transition graph
    #[arg(long, global = true)]
    tau_max: Option<usize>,
    /// Edge cost weights as `i,v,a,s`
    #[arg(long, global = true)]
    lambdas: Option<String>,
    /// Instability window length N_B
    #[arg(long, global = true)]
    buffer: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// File glob for frame images
    #[arg(long, global = true)]
    pattern: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-frame semantic scores from ROI labels
    Score {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split scores into semantic and non-semantic segments
    Segment {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose per-class speed-ups
    Plan {
        #[arg(long)]
        segments: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select output frames by shortest paths
    Sample {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Directory receiving costs.bin, sampling.json and selected.txt
        #[arg(long)]
        out: PathBuf,
        /// Reuse an existing costs.bin in the output directory
        #[arg(long)]
        reuse_costs: bool,
    },
    /// Stabilize the selected frames
    Stabilize {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        selection: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Speed-up, semantic content and instability of an output sequence
    Evaluate {
        #[arg(long)]
        frames: PathBuf,
        /// Original frame index of every output frame, one per line
        #[arg(long)]
        sources: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a synthetic scene
    Synth {
        /// JSON scene description; omitted fields take defaults
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage into one directory
    Pipeline {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config(c: &Common) -> semfast::Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    if let Some(p) = &c.config {
        cfg.apply_file(p)?;
    }
    if let Some(v) = c.speedup {
        cfg.speedup = v;
    }
    if let Some(v) = c.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = c.tau_max {
        cfg.tau_max = v;
    }
    if let Some(v) = &c.lambdas {
        cfg.lambdas = parse_lambdas(v)?;
    }
    if let Some(v) = c.buffer {
        cfg.buffer = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.jobs {
        cfg.jobs = Some(v);
    }
    if let Some(v) = &c.pattern {
        cfg.pattern = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli, cfg: &PipelineConfig) -> semfast::Result<()> {
    match cli.command {
        Command::Score { frames, labels, out } => {
            stages::score(&frames, &labels, &out.join("scores.csv"), cfg)?;
        }
        Command::Segment { scores, out } => {
            stages::segment(&scores, &out.join("segments.json"), cfg)?;
        }
        Command::Plan { segments, out } => {
            stages::plan(&segments, &out.join("plan.json"), cfg)?;
        }
        Command::Sample {
            frames,
            scores,
            plan,
            out,
            reuse_costs,
        } => {
            let run = RunLayout::new(out);
            let outputs = SampleOutputs {
                costs: run.costs(),
                sampling: run.sampling(),
                selection: run.selection(),
                frames: Some(run.sampled()),
                reuse_costs,
            };
            stages::sample(&frames, &scores, &plan, &outputs, cfg)?;
        }
        Command::Stabilize {
            frames,
            scores,
            selection,
            out,
        } => {
            let run = RunLayout::new(out);
            let outputs = StabilizeOutputs {
                frames: run.stabilized(),
                sources: run.stabilized_sources(),
                outcomes: run.outcomes(),
            };
            stages::stabilize(&frames, &scores, &selection, &outputs, cfg)?;
        }
        Command::Evaluate {
            frames,
            sources,
            scores,
            out,
        } => {
            let run = RunLayout::new(out);
            let m = stages::evaluate(&frames, &sources, &scores, &run.metrics_json(), &run.metrics_csv(), cfg)?;
            println!("{}", serde_json::to_string(&m).expect("metrics serialize"));
        }
        Command::Synth { spec, out } => {
            let mut s: SyntheticSceneSpec = match spec {
                Some(p) => semfast::io::read_json(&p)?,
                None => SyntheticSceneSpec::default(),
            };
            if cli.common.seed.is_some() {
                s.seed = cfg.seed;
            }
            stages::synth(&s, &out)?;
        }
        Command::Pipeline { frames, labels, out } => {
            let m = stages::pipeline(&frames, &labels, &RunLayout::new(out), cfg)?;
            println!("{}", serde_json::to_string(&m).expect("metrics serialize"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match config(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(j) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 1,
                _ => 2,
            })
        }
    }
}
