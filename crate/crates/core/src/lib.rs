//! Neural genetic search over constructive sequence policies.
//!
//! A pretrained policy proposes tokens one step at a time. The search keeps a
//! population of complete sequences, picks parent pairs by rank, and decodes
//! offspring with the vocabulary restricted to the parents' tokens (crossover),
//! lifting the restriction with small probability or whenever no parent token
//! is feasible (mutation).
//!
//! The crate ships four routing environments (TSP, CVRP, PCTSP, OP) with
//! edge tokens, heatmap policies, sampling and beam-search baselines, and
//! exact oracles for small instances.
//!
//! ```
//! use ngs::cli::generate_instance;
//! use ngs::{run_ngs, Heatmap, Kind, NgsConfig};
//!
//! # fn main() -> ngs::Result<()> {
//! let inst = generate_instance(Kind::Tsp, 20, 0)?;
//! let policy = Heatmap::inverse_distance(&inst, 3.0)?;
//! let config = NgsConfig { n_pop: 20, n_off: 20, n_iter: 5, seed: 1, ..NgsConfig::default() };
//! let result = run_ngs(&policy, &inst, &config)?;
//! assert_eq!(result.total_evaluations, 120);
//! assert!(result.best.reward < 0.0);
//! # Ok(())
//! # }
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod decoding;
pub mod engine;
pub mod error;
pub mod heatmap;
pub mod oracle;
pub mod rng;
pub mod routing;

pub use decoding::{Environment, Policy, Token};
pub use engine::{run_ngs, Chromosome, NgsConfig, Population, SearchResult};
pub use error::{Error, Result};
pub use heatmap::Heatmap;
pub use routing::{Kind, Problem, RoutingInstance};
