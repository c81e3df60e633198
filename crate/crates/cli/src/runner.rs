use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use cgo_core::metrics::{rpd, sd_percent_with, RunTrace, SdKind};
use cgo_core::{read_tsplib, run_seed, summarize, Algorithm, Engine, Landscape, RunSummary};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{load_optima, ExperimentConfig};

/// One loaded problem with its reference length.
#[derive(Debug, Clone)]
pub struct Problem {
    pub land: Landscape,
    pub f_star: i64,
}

impl Problem {
    pub fn name(&self) -> &str {
        &self.land.name
    }
}

#[derive(Debug, Clone)]
pub struct Replicate {
    pub run: usize,
    pub best: i64,
    pub trace: RunTrace,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SummaryRow {
    pub instance: String,
    pub algorithm: String,
    pub n: usize,
    pub f_star: i64,
    pub runs: usize,
    pub best_ratio: f64,
    pub mean_rpd: f64,
    pub sd: f64,
    pub best: i64,
    pub worst: i64,
    pub mean_cpu_seconds: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub instance: String,
    pub p_ind: f64,
    pub runs: usize,
    pub mean_rpd: f64,
    pub sd: f64,
    pub best_ratio: f64,
    /// Instances averaged into an aggregate row, `;`-separated.
    pub instances: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DiversityRow {
    pub t: usize,
    pub algorithm: String,
    pub diversity: f64,
    pub rpd: f64,
}

pub const AGGREGATE: &str = "aggregate";

/// Reference lengths from the configured optima file plus inline overrides.
pub fn reference_lengths(cfg: &ExperimentConfig) -> Result<BTreeMap<String, i64>> {
    let mut table = match &cfg.optima {
        Some(path) => load_optima(path)?,
        None => BTreeMap::new(),
    };
    table.extend(cfg.f_star.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(table)
}

pub fn load_problem(path: &Path, k: usize, optima: &BTreeMap<String, i64>) -> Result<Problem> {
    let inst = read_tsplib(path).with_context(|| format!("loading {}", path.display()))?;
    let mut land = Landscape::from_instance(&inst, k);
    if land.name.is_empty() {
        land.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    let f_star = *optima
        .get(&land.name)
        .ok_or_else(|| anyhow!("no reference length for instance {:?}", land.name))?;
    anyhow::ensure!(
        f_star > 0,
        "reference length for {:?} must be positive",
        land.name
    );
    Ok(Problem { land, f_star })
}

pub fn load_problems(cfg: &ExperimentConfig) -> Result<Vec<Problem>> {
    let optima = reference_lengths(cfg)?;
    cfg.instances
        .iter()
        .map(|p| load_problem(p, cfg.neighbors, &optima))
        .collect()
}

/// Runs `cfg.runs` independent replicates, in parallel across runs.
pub fn run_replicates(
    land: &Landscape,
    algorithm: Algorithm,
    cfg: &ExperimentConfig,
) -> Result<Vec<Replicate>> {
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let engine_cfg = cfg.engine_config(run_seed(cfg.seed, run as u64))?;
            let start = Instant::now();
            let out = Engine::new(land, algorithm, engine_cfg)?.run()?;
            Ok(Replicate {
                run,
                best: out.best.length(),
                trace: out.trace,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

pub fn summary_row(
    problem: &Problem,
    algorithm: Algorithm,
    reps: &[Replicate],
    sd: SdKind,
) -> Result<SummaryRow> {
    let finals: Vec<i64> = reps.iter().map(|r| r.best).collect();
    let RunSummary {
        instance,
        f_star,
        runs,
        best_ratio,
        mean_rpd,
        best,
        worst,
        ..
    } = summarize(problem.name(), &finals, problem.f_star)?;
    Ok(SummaryRow {
        instance,
        algorithm: algorithm.name().to_string(),
        n: problem.land.n(),
        f_star,
        runs,
        best_ratio,
        mean_rpd,
        sd: sd_percent_with(&finals, problem.f_star, sd)?,
        best,
        worst,
        mean_cpu_seconds: reps.iter().map(|r| r.seconds).sum::<f64>() / reps.len() as f64,
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_trace(path: &Path, trace: &RunTrace, f_star: i64) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        t: usize,
        f_gb: i64,
        rpd: f64,
        diversity: f64,
    }
    let rows = trace
        .records
        .iter()
        .map(|r| {
            Ok(Row {
                t: r.t,
                f_gb: r.f_gb,
                rpd: rpd(r.f_gb, f_star)?,
                diversity: r.diversity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(path, &rows)
}

/// Runs the configured algorithm on every instance and writes
/// `summary.csv` plus one trace per run under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    let algorithm = cfg.algorithm()?;
    let sd = cfg.sd_kind()?;
    let mut rows = Vec::new();
    for problem in load_problems(cfg)? {
        let reps = run_replicates(&problem.land, algorithm, cfg)?;
        if cfg.write_traces {
            for rep in &reps {
                let path = trace_path(&cfg.out_dir, problem.name(), algorithm, rep.run);
                write_trace(&path, &rep.trace, problem.f_star)?;
            }
        }
        rows.push(summary_row(&problem, algorithm, &reps, sd)?);
    }
    write_csv(&cfg.out_dir.join("summary.csv"), &rows)?;
    Ok(rows)
}

pub fn trace_path(out: &Path, instance: &str, algorithm: Algorithm, run: usize) -> PathBuf {
    out.join(instance)
        .join(format!("trace_{}_{run}.csv", algorithm.name()))
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Mean RPD of the configured algorithm for each `p_ind` in `grid`, per
/// instance and averaged over instances. Writes `sweep.csv`.
pub fn sweep_p_ind(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    anyhow::ensure!(!grid.is_empty(), "empty p_ind grid");
    let algorithm = cfg.algorithm()?;
    let sd = cfg.sd_kind()?;
    let problems = load_problems(cfg)?;
    let names: Vec<&str> = problems.iter().map(Problem::name).collect();
    let mut rows = Vec::new();
    for &p in grid {
        let point = ExperimentConfig {
            p_ind: p,
            ..cfg.clone()
        };
        let mut per_instance = Vec::new();
        for problem in &problems {
            let reps = run_replicates(&problem.land, algorithm, &point)?;
            let s = summary_row(problem, algorithm, &reps, sd)?;
            per_instance.push(SweepRow {
                instance: s.instance,
                p_ind: p,
                runs: s.runs,
                mean_rpd: s.mean_rpd,
                sd: s.sd,
                best_ratio: s.best_ratio,
                instances: problem.name().to_string(),
            });
        }
        let agg = SweepRow {
            instance: AGGREGATE.to_string(),
            p_ind: p,
            runs: cfg.runs,
            mean_rpd: mean(per_instance.iter().map(|r| r.mean_rpd)),
            sd: mean(per_instance.iter().map(|r| r.sd)),
            best_ratio: mean(per_instance.iter().map(|r| r.best_ratio)),
            instances: names.join(";"),
        };
        rows.extend(per_instance);
        rows.push(agg);
    }
    write_csv(&cfg.out_dir.join("sweep.csv"), &rows)?;
    Ok(rows)
}

/// Per-cycle population diversity and RPD, averaged over runs.
pub fn mean_curves(reps: &[Replicate], f_star: i64) -> Result<Vec<(usize, f64, f64)>> {
    let len = reps.iter().map(|r| r.trace.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let t = reps[0].trace.records[i].t;
            let div = mean(reps.iter().map(|r| r.trace.records[i].diversity));
            let rpds = reps
                .iter()
                .map(|r| rpd(r.trace.records[i].f_gb, f_star))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((t, div, mean(rpds)))
        })
        .collect()
}

/// Diversity and RPD curves of CGO-AS_3opt and MMAS_3opt on the first
/// configured instance. Writes `diversity.csv`.
pub fn emit_diversity_trace(cfg: &ExperimentConfig) -> Result<Vec<DiversityRow>> {
    cfg.validate()?;
    let problems = load_problems(cfg)?;
    let problem = &problems[0];
    let mut rows = Vec::new();
    for algorithm in [Algorithm::CgoAs3opt, Algorithm::Mmas3opt] {
        let reps = run_replicates(&problem.land, algorithm, cfg)?;
        for (t, diversity, rpd) in mean_curves(&reps, problem.f_star)? {
            rows.push(DiversityRow {
                t,
                algorithm: algorithm.name().to_string(),
                diversity,
                rpd,
            });
        }
    }
    write_csv(&cfg.out_dir.join("diversity.csv"), &rows)?;
    Ok(rows)
}
