//! Pipeline configuration: defaults, a flat `key = value` file, and overrides.

use std::path::Path;

use semfast_core::motion::MotionConfig;
use semfast_core::planner::PlannerConfig;
use semfast_core::sampler::{GraphConfig, Lambdas};
use semfast_core::semantic::GaussianSpec;
use semfast_core::stabilize::StabilizerConfig;
use semfast_core::Dims;

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Desired overall speed-up `F_d`.
    pub speedup: u32,
    pub alpha: usize,
    pub tau_max: usize,
    pub tau_b: usize,
    pub lambdas: Lambdas,
    pub epsilon: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub f_max: Option<u32>,
    pub otsu_bins: usize,
    /// Shortest run kept as its own segment.
    pub min_segment: usize,
    /// Gaussian spread for semantic scores; `None` uses half the short side.
    pub sigma: Option<f64>,
    pub buffer: usize,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub dp: f64,
    pub cp: f64,
    pub sigma_cov: f64,
    pub eta: f64,
    pub max_replacements: usize,
    pub histogram_bins: usize,
    pub pattern: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let graph = GraphConfig::default();
        let planner = PlannerConfig::default();
        let stab = StabilizerConfig::default();
        PipelineConfig {
            speedup: 10,
            alpha: stab.alpha,
            tau_max: graph.tau_max,
            tau_b: graph.tau_b,
            lambdas: graph.lambdas,
            epsilon: graph.epsilon,
            lambda1: planner.lambda1,
            lambda2: planner.lambda2,
            f_max: planner.f_max,
            otsu_bins: 256,
            min_segment: 15,
            sigma: None,
            buffer: 5,
            seed: 17,
            jobs: None,
            dp: stab.dp,
            cp: stab.cp,
            sigma_cov: stab.sigma_cov,
            eta: stab.eta,
            max_replacements: stab.max_replacements,
            histogram_bins: MotionConfig::default().histogram_bins,
            pattern: "*.png".into(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("invalid value {value:?} for {key}: {e}")))
}

pub fn parse_lambdas(value: &str) -> Result<Lambdas> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|p| parse::<f64>("lambdas", p.trim()))
        .collect::<Result<_>>()?;
    match parts[..] {
        [instability, velocity, appearance, semantic] => Ok(Lambdas {
            instability,
            velocity,
            appearance,
            semantic,
        }),
        _ => Err(Error::Config(format!("lambdas needs four comma-separated values, got {value:?}"))),
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "speedup" => self.speedup = parse(&key, value)?,
            "alpha" => self.alpha = parse(&key, value)?,
            "tau_max" => self.tau_max = parse(&key, value)?,
            "tau_b" => self.tau_b = parse(&key, value)?,
            "lambdas" => self.lambdas = parse_lambdas(value)?,
            "epsilon" => self.epsilon = parse(&key, value)?,
            "lambda1" => self.lambda1 = parse(&key, value)?,
            "lambda2" => self.lambda2 = parse(&key, value)?,
            "f_max" => self.f_max = Some(parse(&key, value)?),
            "otsu_bins" => self.otsu_bins = parse(&key, value)?,
            "min_segment" => self.min_segment = parse(&key, value)?,
            "sigma" => self.sigma = Some(parse(&key, value)?),
            "buffer" => self.buffer = parse(&key, value)?,
            "seed" => self.seed = parse(&key, value)?,
            "jobs" => self.jobs = Some(parse(&key, value)?),
            "dp" => self.dp = parse(&key, value)?,
            "cp" => self.cp = parse(&key, value)?,
            "sigma_cov" => self.sigma_cov = parse(&key, value)?,
            "eta" => self.eta = parse(&key, value)?,
            "max_replacements" => self.max_replacements = parse(&key, value)?,
            "histogram_bins" => self.histogram_bins = parse(&key, value)?,
            "pattern" => self.pattern = value.to_string(),
            _ => return Err(Error::Config(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    /// Applies a flat settings file: one `key = value` per line, `#` starts a
    /// comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", k + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", k + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).at(path)?;
        self.apply_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.speedup == 0 {
            return Err(Error::Config("speedup must be at least 1".into()));
        }
        if self.buffer < 2 {
            return Err(Error::Config("buffer must be at least 2".into()));
        }
        if self.otsu_bins < 2 || self.histogram_bins < 1 {
            return Err(Error::Config("bin counts too small".into()));
        }
        self.graph().validate()?;
        Ok(())
    }

    pub fn motion(&self) -> MotionConfig {
        let mut m = MotionConfig {
            histogram_bins: self.histogram_bins,
            ..MotionConfig::default()
        };
        m.ransac.seed = self.seed;
        m
    }

    pub fn graph(&self) -> GraphConfig {
        GraphConfig {
            tau_max: self.tau_max,
            tau_b: self.tau_b,
            lambdas: self.lambdas,
            epsilon: self.epsilon,
        }
    }

    pub fn planner(&self) -> PlannerConfig {
        PlannerConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            f_max: self.f_max,
        }
    }

    pub fn stabilizer(&self) -> StabilizerConfig {
        let mut s = StabilizerConfig {
            alpha: self.alpha,
            dp: self.dp,
            cp: self.cp,
            sigma_cov: self.sigma_cov,
            eta: self.eta,
            max_replacements: self.max_replacements,
            ..StabilizerConfig::default()
        };
        s.ransac.seed = self.seed;
        s
    }

    pub fn gaussian(&self, dims: Dims) -> Result<GaussianSpec> {
        match self.sigma {
            Some(s) => Ok(GaussianSpec::with_sigma(dims, s)?),
            None => Ok(GaussianSpec::for_frame(dims)),
        }
    }
}
