use std::fmt;

use crate::landscape::Tour;
use crate::pheromone::PheromoneMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChunkKind {
    Tour,
    TourSet,
    Pheromone,
}

impl fmt::Display for ChunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tour => "tour",
            Self::TourSet => "tour set",
            Self::Pheromone => "pheromone matrix",
        })
    }
}

/// A unit of knowledge held in a memory slot.
#[derive(Debug, Clone, PartialEq)]
pub enum Chunk {
    Tour(Tour),
    TourSet(Vec<Tour>),
    Pheromone(PheromoneMatrix),
}

impl Chunk {
    pub fn kind(&self) -> ChunkKind {
        match self {
            Self::Tour(_) => ChunkKind::Tour,
            Self::TourSet(_) => ChunkKind::TourSet,
            Self::Pheromone(_) => ChunkKind::Pheromone,
        }
    }

    pub fn as_tour(&self) -> Option<&Tour> {
        match self {
            Self::Tour(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_pheromone(&self) -> Option<&PheromoneMatrix> {
        match self {
            Self::Pheromone(p) => Some(p),
            _ => None,
        }
    }
}
