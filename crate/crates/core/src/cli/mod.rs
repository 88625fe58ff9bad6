//! User-facing surface: instance ingestion, run configuration, benchmark
//! harness and result files. The `ngs` binary is a thin wrapper over this.

pub mod generate;
pub mod run;
pub mod tsplib;

pub use generate::generate_instance;
pub use run::{bench, run, BenchSpec, BenchmarkRow, InstanceSource, Manifest, PolicySpec, RunConfig, SearchSpec};
pub use tsplib::{parse_tsplib, write_tsplib};
