//! The cooperative group optimization engine: agents, the interactive
//! center, memory protocol tables and the learning cycle.

mod chunk;
mod engine;
pub mod spec;
pub mod toolbox;

use thiserror::Error;

pub use chunk::{Chunk, ChunkKind};
pub use engine::{run_seed, AgentState, CgoConfig, Engine, GbTiming, RunOutcome, SocialState};
pub use spec::{validate, Algorithm, Esh, MemoryId, MemoryProtocolRow, SpecMp};
pub use toolbox::{Rule, Toolbox};

use crate::construction::ConstructionError;
use crate::pheromone::PheromoneError;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown rule {0:?}")]
    UnknownRule(String),
    #[error("rule {id:?} cannot serve as a {role} rule")]
    WrongRuleRole { id: String, role: &'static str },
    #[error("unknown chunk slot {0:?}")]
    UnknownSlot(String),
    #[error("slot {0:?} declared twice")]
    DuplicateSlot(String),
    #[error("slot {slot:?} holds a {found} where a {expected} is required")]
    KindMismatch {
        slot: String,
        expected: ChunkKind,
        found: ChunkKind,
    },
    #[error("rule {id:?} takes {expected} inputs, {found} given")]
    ArityMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("slot {0:?} has no update path from the generated chunk")]
    NotUpdatable(String),
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum CgoError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pheromone(#[from] PheromoneError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}
