use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cgo_core::framework::GbTiming;
use cgo_core::metrics::SdKind;
use cgo_core::{Algorithm, CgoConfig, MixedRuleParams, PheromoneParams};
use serde::Deserialize;

pub const DEFAULT_CYCLES: usize = 500;
pub const DEFAULT_AGENTS: usize = 10;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_RHO: f64 = 0.5;
pub const DEFAULT_P_BEST: f64 = 0.05;
pub const DEFAULT_SIGMA_C: f64 = 0.1;
pub const DEFAULT_W: f64 = 0.1;
pub const DEFAULT_NEIGHBORS: usize = 20;
pub const DEFAULT_P_IND: f64 = 0.8;
pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instances: Vec<PathBuf>,
    pub algorithm: String,
    pub agents: usize,
    pub cycles: usize,
    pub p_ind: f64,
    pub sigma_c: f64,
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
    pub p_best: f64,
    pub neighbors: usize,
    pub runs: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// CSV of `name,f_star` reference lengths.
    pub optima: Option<PathBuf>,
    /// Per-instance reference lengths; these win over the optima file.
    pub f_star: BTreeMap<String, i64>,
    /// Parallelize agents inside a run instead of only across runs.
    pub parallel_agents: bool,
    /// `"within"` or `"previous"`.
    pub gb_timing: String,
    /// `"population"` or `"sample"`.
    pub sd: String,
    pub write_traces: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            instances: Vec::new(),
            algorithm: Algorithm::CgoAs3opt.name().to_string(),
            agents: DEFAULT_AGENTS,
            cycles: DEFAULT_CYCLES,
            p_ind: DEFAULT_P_IND,
            sigma_c: DEFAULT_SIGMA_C,
            w: DEFAULT_W,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            rho: DEFAULT_RHO,
            p_best: DEFAULT_P_BEST,
            neighbors: DEFAULT_NEIGHBORS,
            runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("results"),
            optima: None,
            f_star: BTreeMap::new(),
            parallel_agents: false,
            gb_timing: "within".to_string(),
            sd: "population".to_string(),
            write_traces: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid experiment config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        Ok(self.algorithm.parse()?)
    }

    pub fn gb_timing(&self) -> Result<GbTiming> {
        match self.gb_timing.as_str() {
            "within" => Ok(GbTiming::WithinCycle),
            "previous" => Ok(GbTiming::PreviousCycle),
            other => anyhow::bail!("gb_timing must be \"within\" or \"previous\", got {other:?}"),
        }
    }

    pub fn sd_kind(&self) -> Result<SdKind> {
        match self.sd.as_str() {
            "population" => Ok(SdKind::Population),
            "sample" => Ok(SdKind::Sample),
            other => anyhow::bail!("sd must be \"population\" or \"sample\", got {other:?}"),
        }
    }

    /// Engine settings for one replicate.
    pub fn engine_config(&self, seed: u64) -> Result<CgoConfig> {
        let cfg = CgoConfig {
            agents: self.agents,
            cycles: self.cycles,
            pheromone: PheromoneParams {
                rho: self.rho,
                p_best: self.p_best,
                alpha: self.alpha,
                beta: self.beta,
            },
            mixed: MixedRuleParams {
                p_ind: self.p_ind,
                sigma_c: self.sigma_c,
                w: self.w,
            },
            gb_timing: self.gb_timing()?,
            parallel_agents: self.parallel_agents,
            seed,
            ..CgoConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.algorithm()?;
        self.sd_kind()?;
        self.engine_config(self.seed)?;
        anyhow::ensure!(self.runs >= 1, "runs must be at least 1");
        anyhow::ensure!(self.neighbors >= 1, "neighbors must be at least 1");
        anyhow::ensure!(!self.instances.is_empty(), "no instance given");
        Ok(())
    }
}

/// Reads a `name,f_star[,...]` CSV of reference tour lengths.
pub fn load_optima(path: &Path) -> Result<BTreeMap<String, i64>> {
    #[derive(Deserialize)]
    struct Row {
        name: String,
        f_star: i64,
    }
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("reading optima from {}", path.display()))?;
    let mut out = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: Row = row.with_context(|| format!("in {}", path.display()))?;
        out.insert(row.name, row.f_star);
    }
    Ok(out)
}
