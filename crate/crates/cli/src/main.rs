use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use cgo_cli::{
    emit_diversity_trace, load_optima, run_experiment, sweep_p_ind, tour_file_length,
    ExperimentConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cgo",
    version,
    about = "CGO-AS and MMAS ant systems for the symmetric TSP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on a set of instances and write summary.csv.
    Run(Common),
    /// Sweep p_ind over a grid and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated p_ind values.
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1")]
        grid: Vec<f64>,
    },
    /// Per-cycle diversity of CGO-AS_3opt and MMAS_3opt, written to diversity.csv.
    Trace(Common),
    /// Check the length of a tour file against the reference optimum.
    Validate {
        instance: PathBuf,
        tour: PathBuf,
        #[arg(long, default_value = "data/optima.csv")]
        optima: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// TSPLIB instance files.
    instances: Vec<PathBuf>,
    /// TOML experiment file; flags given here override it.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    algorithm: Option<String>,
    #[arg(long, short = 'k')]
    agents: Option<usize>,
    #[arg(long, short = 't')]
    cycles: Option<usize>,
    #[arg(long)]
    p_ind: Option<f64>,
    #[arg(long)]
    sigma_c: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    p_best: Option<f64>,
    /// Candidate list size.
    #[arg(long)]
    neighbors: Option<usize>,
    #[arg(long, short)]
    runs: Option<usize>,
    #[arg(long, short)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    optima: Option<PathBuf>,
    /// Reference length override as NAME=LENGTH; repeatable.
    #[arg(long = "f-star", value_parser = parse_f_star)]
    f_star: Vec<(String, i64)>,
    /// Generate agents' tours in parallel within each run.
    #[arg(long)]
    parallel_agents: bool,
    /// `within` or `previous`.
    #[arg(long)]
    gb_timing: Option<String>,
    /// `population` or `sample`.
    #[arg(long)]
    sd: Option<String>,
    #[arg(long)]
    no_traces: bool,
}

fn parse_f_star(s: &str) -> Result<(String, i64), String> {
    let (name, len) = s.split_once('=').ok_or("expected NAME=LENGTH")?;
    let len = len.trim().parse().map_err(|e| format!("bad length: {e}"))?;
    Ok((name.trim().to_string(), len))
}

impl Common {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig {
                optima: Some(PathBuf::from("data/optima.csv")),
                ..Default::default()
            },
        };
        if !self.instances.is_empty() {
            cfg.instances = self.instances;
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        set!(algorithm, agents, cycles, p_ind, sigma_c, w, alpha, beta, rho, p_best);
        set!(neighbors, runs, seed, gb_timing, sd);
        if let Some(out) = self.out {
            cfg.out_dir = out;
        }
        if let Some(optima) = self.optima {
            cfg.optima = Some(optima);
        }
        cfg.f_star.extend(self.f_star);
        cfg.parallel_agents |= self.parallel_agents;
        cfg.write_traces &= !self.no_traces;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.into_config()?;
            for r in run_experiment(&cfg)? {
                println!(
                    "{:<10} {:<12} best {:>8} worst {:>8} rpd {:>7.3}% sd {:>6.3}% hit {:>5.1}% {:>8.2}s",
                    r.instance,
                    r.algorithm,
                    r.best,
                    r.worst,
                    r.mean_rpd,
                    r.sd,
                    100.0 * r.best_ratio,
                    r.mean_cpu_seconds
                );
            }
            println!("wrote {}", cfg.out_dir.join("summary.csv").display());
        }
        Command::Sweep { common, grid } => {
            let cfg = common.into_config()?;
            for r in sweep_p_ind(&cfg, &grid)? {
                println!(
                    "{:<10} p_ind {:.2} rpd {:>7.3}%",
                    r.instance, r.p_ind, r.mean_rpd
                );
            }
            println!("wrote {}", cfg.out_dir.join("sweep.csv").display());
        }
        Command::Trace(common) => {
            let cfg = common.into_config()?;
            let rows = emit_diversity_trace(&cfg)?;
            println!("{} rows", rows.len());
            println!("wrote {}", cfg.out_dir.join("diversity.csv").display());
        }
        Command::Validate {
            instance,
            tour,
            optima,
        } => {
            let (name, len) = tour_file_length(&instance, &tour)?;
            let table = load_optima(&optima)?;
            match table.get(&name) {
                Some(&f) if f == len => println!("{name}: {len} (matches reference)"),
                Some(&f) => anyhow::bail!("{name}: tour length {len}, reference {f}"),
                None => println!("{name}: {len} (no reference length)"),
            }
        }
    }
    Ok(())
}
