//! Ant-system solvers for the symmetric TSP built on a small cooperative
//! group optimization (CGO) framework: agents keep a personal-best tour, an
//! interactive center keeps the pheromone matrix, and a per-agent generating
//! rule mixes both.

pub mod construction;
pub mod framework;
pub mod landscape;
pub mod local_search;
pub mod metrics;
pub mod pheromone;
pub mod tsplib;

pub use construction::{
    construct_mixed, construct_social, sample_truncated_normal, select_next_city, MixedRuleParams,
    SelectionKernel,
};
pub use framework::{
    run_seed, Algorithm, CgoConfig, CgoError, Chunk, ConfigError, Engine, Esh, GbTiming, MemoryId,
    RunOutcome, SpecMp,
};
pub use landscape::{brute_force_optimal, quality_better, tour_length, BestSoFar, Landscape, Tour};
pub use local_search::{three_opt_improve, ThreeOpt};
pub use metrics::{
    ks_critical, ks_statistic, population_diversity, rpd, sd_percent, summarize, tour_distance,
    RunSummary, RunTrace,
};
pub use pheromone::{DepositMode, DepositSchedule, PheromoneMatrix, PheromoneParams};
pub use tsplib::{
    build_cost_matrix, build_neighbor_lists, parse_tsplib, read_tsplib, CostMatrix, EdgeWeightType,
    NeighborLists, TspInstance, TsplibError,
};
