//! Experiment driver for the `cgo` binary: configuration, replicate
//! execution and CSV reporting.

pub mod config;
pub mod runner;

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use cgo_core::tsplib::parse_tour_file;
use cgo_core::{build_cost_matrix, read_tsplib, tour_length};

pub use config::{load_optima, ExperimentConfig};
pub use runner::{
    emit_diversity_trace, load_problem, load_problems, mean_curves, run_experiment, run_replicates,
    summary_row, sweep_p_ind, DiversityRow, Problem, Replicate, SummaryRow, SweepRow, AGGREGATE,
};

/// Length of the tour stored in a TSPLIB `.tour` file.
pub fn tour_file_length(instance: &Path, tour: &Path) -> Result<(String, i64)> {
    let inst = read_tsplib(instance).with_context(|| format!("loading {}", instance.display()))?;
    let text = fs::read_to_string(tour).with_context(|| format!("reading {}", tour.display()))?;
    let perm = parse_tour_file(&text, inst.dimension())?;
    let d = build_cost_matrix(&inst);
    Ok((inst.name, tour_length(&perm, &d)?))
}
