//! Run configuration, benchmark rows, and result files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::generate_instance;
use super::tsplib::parse_tsplib_str;
use crate::decoding::beam_search;
use crate::engine::{best_of_n, run_ngs_with, Chromosome, NgsConfig, Refiner};
use crate::error::{Error, Result};
use crate::heatmap::Heatmap;
use crate::oracle::exact_optimum;
use crate::rng::derive_seed;
use crate::routing::{decode, two_opt, Kind, RoutingInstance};

pub const CSV_HEADER: [&str; 7] = ["instance", "method", "reward", "gap_pct", "time_ms", "evals", "seed"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source")]
pub enum InstanceSource {
    /// TSPLIB subset (`.tsp`, `.vrp`) or the JSON instance format.
    File {
        path: PathBuf,
    },
    Generated {
        kind: Kind,
        n: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum PolicySpec {
    HeatmapFile { path: PathBuf },
    InverseDistance { beta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SearchSpec {
    Ngs(NgsConfig),
    Sample { samples: usize },
    Beam { width: usize },
}

impl SearchSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SearchSpec::Ngs(_) => "ngs",
            SearchSpec::Sample { .. } => "sample",
            SearchSpec::Beam { .. } => "beam",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub instance: InstanceSource,
    pub policy: PolicySpec,
    pub search: SearchSpec,
    #[serde(default)]
    pub local_search: bool,
    pub seed: u64,
    pub repetitions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub instance: String,
    pub method: String,
    pub reward: f64,
    pub gap_pct: Option<f64>,
    pub time_ms: f64,
    pub evals: usize,
    pub seed: u64,
}

/// Everything needed to reproduce a set of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub runs: Vec<RunConfig>,
}

impl Manifest {
    pub fn new(runs: Vec<RunConfig>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            runs,
        }
    }
}

pub fn load_instance(source: &InstanceSource) -> Result<RoutingInstance> {
    match source {
        InstanceSource::Generated { kind, n, seed } => generate_instance(*kind, *n, *seed),
        InstanceSource::File { path } => read_instance_file(path),
    }
}

/// Reads a JSON instance (content starting with `{`) or a TSPLIB file.
pub fn read_instance_file(path: &Path) -> Result<RoutingInstance> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(&text)?)
    } else {
        Ok(parse_tsplib_str(&text)?)
    }
}

pub fn load_policy(spec: &PolicySpec, inst: &RoutingInstance) -> Result<Heatmap> {
    Ok(match spec {
        PolicySpec::InverseDistance { beta } => Heatmap::inverse_distance(inst, *beta)?,
        PolicySpec::HeatmapFile { path } => Heatmap::load(path)?,
    })
}

/// Relative distance to the optimum in percent; `None` when undefined.
pub fn gap_percent(kind: Kind, reward: f64, optimum: f64) -> Option<f64> {
    if kind.is_minimization() {
        let (len, best) = (-reward, -optimum);
        (best > 0.0).then(|| (len - best) / best * 100.0)
    } else {
        (optimum > 0.0).then(|| (optimum - reward) / optimum * 100.0)
    }
}

/// Replaces a sequence by its 2-opt local optimum.
pub fn local_search(inst: &RoutingInstance, c: Chromosome) -> Result<Chromosome> {
    let sol = two_opt(inst, &decode(inst, &c.tokens)?);
    Ok(Chromosome {
        tokens: sol.edges,
        reward: sol.objective,
        ..c
    })
}

fn solve_once(
    inst: &RoutingInstance,
    policy: &Heatmap,
    search: &SearchSpec,
    seed: u64,
    refine: Option<&Refiner<'_>>,
) -> Result<(Chromosome, usize)> {
    match search {
        SearchSpec::Ngs(cfg) => {
            let cfg = NgsConfig { seed, ..cfg.clone() };
            let res = run_ngs_with(policy, inst, &cfg, refine)?;
            Ok((res.best, res.total_evaluations))
        }
        SearchSpec::Sample { samples } => Ok((best_of_n(policy, inst, *samples, seed, refine)?, *samples)),
        SearchSpec::Beam { width } => {
            let hyps = beam_search(policy, inst, *width)?;
            let evals = hyps.len();
            let mut best: Option<Chromosome> = None;
            for h in hyps {
                let c = match refine {
                    Some(f) => f(h.chromosome)?,
                    None => h.chromosome,
                };
                if best.as_ref().is_none_or(|b| c.reward > b.reward) {
                    best = Some(c);
                }
            }
            Ok((best.ok_or(Error::NoFeasibleToken)?, evals))
        }
    }
}

/// Seed used by repetition `rep` of a run.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, rep as u64)
}

/// Executes a run configuration and, if `output` is set, writes the CSV and a
/// JSON manifest next to it.
pub fn run(config: &RunConfig) -> Result<Vec<BenchmarkRow>> {
    let rows = execute(config)?;
    if let Some(out) = &config.output {
        write_csv(out, &rows)?;
        write_manifest(&out.with_extension("json"), &Manifest::new(vec![config.clone()]))?;
    }
    Ok(rows)
}

fn execute(config: &RunConfig) -> Result<Vec<BenchmarkRow>> {
    if config.repetitions == 0 {
        return Err(Error::Config("repetitions must be positive".into()));
    }
    let inst = load_instance(&config.instance)?;
    let policy = load_policy(&config.policy, &inst)?;
    let optimum = exact_optimum(&inst).map(|r| r.optimum);
    let ls = |c: Chromosome| local_search(&inst, c);
    let refine: Option<&Refiner<'_>> = if config.local_search { Some(&ls) } else { None };
    let method = if config.local_search {
        format!("{}+2opt", config.search.name())
    } else {
        config.search.name().to_string()
    };
    (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let seed = repetition_seed(config.seed, rep);
            let t0 = Instant::now();
            let (best, evals) = solve_once(&inst, &policy, &config.search, seed, refine)?;
            let time_ms = t0.elapsed().as_secs_f64() * 1e3;
            Ok(BenchmarkRow {
                instance: inst.name().to_string(),
                method: method.clone(),
                reward: best.reward,
                gap_pct: optimum.and_then(|o| gap_percent(inst.kind(), best.reward, o)),
                time_ms,
                evals,
                seed,
            })
        })
        .collect()
}

/// Runs every configuration of a manifest in order.
pub fn run_manifest(manifest: &Manifest) -> Result<Vec<BenchmarkRow>> {
    let mut rows = Vec::new();
    for cfg in &manifest.runs {
        rows.extend(execute(cfg)?);
    }
    Ok(rows)
}

/// Writes to a sibling temporary file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn csv_string(rows: &[BenchmarkRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(path: &Path, rows: &[BenchmarkRow]) -> Result<()> {
    write_atomic(path, csv_string(rows)?.as_bytes())
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchmarkRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(manifest)?.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// A grid of generated instances crossed with methods at a fixed budget.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub kind: Kind,
    pub n: usize,
    pub instances: usize,
    pub seed: u64,
    /// Sequences decoded per method and instance.
    pub budget: usize,
    pub beta: f64,
    pub ngs: NgsConfig,
    pub methods: Vec<String>,
    pub beam_width: usize,
    pub local_search: bool,
    pub repetitions: usize,
}

impl BenchSpec {
    pub fn runs(&self) -> Result<Vec<RunConfig>> {
        if self.budget < self.ngs.n_pop {
            return Err(Error::Config(format!(
                "budget {} is smaller than the population {}",
                self.budget, self.ngs.n_pop
            )));
        }
        let mut runs = Vec::new();
        for i in 0..self.instances {
            let instance = InstanceSource::Generated {
                kind: self.kind,
                n: self.n,
                seed: derive_seed(self.seed, i as u64),
            };
            for m in &self.methods {
                let search = match m.as_str() {
                    "ngs" => SearchSpec::Ngs(NgsConfig {
                        n_iter: (self.budget - self.ngs.n_pop) / self.ngs.n_off,
                        ..self.ngs.clone()
                    }),
                    "sample" => SearchSpec::Sample { samples: self.budget },
                    "beam" => SearchSpec::Beam { width: self.beam_width },
                    other => return Err(Error::Config(format!("unknown method {other:?}"))),
                };
                runs.push(RunConfig {
                    instance: instance.clone(),
                    policy: PolicySpec::InverseDistance { beta: self.beta },
                    search,
                    local_search: self.local_search,
                    seed: self.seed,
                    repetitions: self.repetitions,
                    output: None,
                });
            }
        }
        Ok(runs)
    }
}

/// Runs a benchmark and writes `results.csv` and `manifest.json` into `dir`.
pub fn bench(manifest: &Manifest, dir: &Path) -> Result<Vec<BenchmarkRow>> {
    let rows = run_manifest(manifest)?;
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("results.csv"), &rows)?;
    write_manifest(&dir.join("manifest.json"), manifest)?;
    Ok(rows)
}
