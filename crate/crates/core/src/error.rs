use thiserror::Error;

use crate::cli::tsplib::ParseError;
use crate::heatmap::HeatmapError;
use crate::routing::{RoutingError, Violation};

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty population")]
    EmptyPopulation,
    #[error("population of {0} cannot supply parent pairs (need at least 2)")]
    PopulationTooSmall(usize),
    #[error("union of {union} chromosomes is smaller than capacity {capacity}")]
    UnionTooSmall { union: usize, capacity: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("novelty scores required when omega > 0")]
    MissingNovelty,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no feasible token")]
    NoFeasibleToken,
    #[error("mask violation: {0}")]
    MaskViolation(#[from] Violation),
    #[error("environment deadlock")]
    Deadlock,
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Heatmap(#[from] HeatmapError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
