use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ngs::cli::run::{csv_string, load_instance, read_manifest, run};
use ngs::cli::{bench, generate_instance, BenchSpec, InstanceSource, Manifest, PolicySpec, RunConfig, SearchSpec};
use ngs::oracle::exact_optimum;
use ngs::routing::{decode, edge_endpoints, edge_token};
use ngs::{Error, Heatmap, Kind, NgsConfig, RoutingInstance};

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "ngs", version, about = "Genetic search over constructive routing policies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen(GenArgs),
    /// Solve one instance and print or write result rows.
    Solve(SolveArgs),
    /// Run a generated benchmark, or replay a manifest.
    Bench(BenchArgs),
    /// Exact optimum of a small instance.
    Oracle(InstanceArgs),
    /// Check a node sequence against an instance and print its objective.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Ngs,
    Sample,
    Beam,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the inverse-distance heatmap to this path.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance file; when absent the instance is generated from --kind, --n and --instance-seed.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    kind: Option<Kind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
}

impl InstanceArgs {
    fn source(&self) -> Result<InstanceSource, String> {
        match (&self.instance, self.kind, self.n) {
            (Some(path), None, None) => Ok(InstanceSource::File { path: path.clone() }),
            (None, Some(kind), Some(n)) => Ok(InstanceSource::Generated {
                kind,
                n,
                seed: self.instance_seed,
            }),
            _ => Err("give either --instance or both --kind and --n".into()),
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value_t = Method::Ngs)]
    method: Method,
    #[arg(long, default_value_t = 100)]
    n_pop: usize,
    #[arg(long, default_value_t = 100)]
    n_off: usize,
    #[arg(long, default_value_t = 9)]
    n_iter: usize,
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    #[arg(long, default_value_t = 0.001)]
    kappa: f64,
    #[arg(long, default_value_t = 0.0)]
    omega: f64,
    #[arg(long)]
    token_discard: bool,
    /// Number of samples for --method sample.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Beam width for --method beam.
    #[arg(long, default_value_t = 16)]
    width: usize,
}

impl SearchArgs {
    fn ngs_config(&self, seed: u64) -> NgsConfig {
        NgsConfig {
            n_pop: self.n_pop,
            n_off: self.n_off,
            n_iter: self.n_iter,
            mu: self.mu,
            kappa: self.kappa,
            omega: self.omega,
            token_discard: self.token_discard,
            seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Heatmap file; defaults to inverse distance with --beta.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
    #[arg(long)]
    local_search: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    /// CSV output path; a manifest is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Replay this manifest instead of generating a benchmark.
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long, default_value = "tsp")]
    kind: Kind,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    /// Evaluation budget per method and instance.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, value_delimiter = ',', default_value = "ngs,sample")]
    methods: Vec<String>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
    #[arg(long)]
    local_search: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    /// Output directory for results.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated visiting order, e.g. 0,2,1,3,0. Consecutive pairs become edges.
    #[arg(long, value_delimiter = ',', required = true)]
    tour: Vec<usize>,
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Heatmap(_) | Error::Routing(_) => EXIT_PARSE,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Oracle(a) => oracle(a),
        Command::Validate(a) => validate(a),
    }
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let inst = generate_instance(a.kind, a.n, a.seed)?;
    let text = serde_json::to_string_pretty(&inst).map_err(Error::from)?;
    std::fs::write(&a.out, text)?;
    if let Some(path) = a.heatmap {
        Heatmap::inverse_distance(&inst, a.beta)
            .map_err(Error::from)?
            .store(path)
            .map_err(Error::from)?;
    }
    println!("wrote {} ({} nodes)", a.out.display(), inst.n());
    Ok(())
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let instance = a.instance.source().map_err(Failure::Usage)?;
    let search = match a.search.method {
        Method::Ngs => SearchSpec::Ngs(a.search.ngs_config(a.seed)),
        Method::Sample => SearchSpec::Sample {
            samples: a.search.samples,
        },
        Method::Beam => SearchSpec::Beam { width: a.search.width },
    };
    let policy = match a.heatmap {
        Some(path) => PolicySpec::HeatmapFile { path },
        None => PolicySpec::InverseDistance { beta: a.beta },
    };
    let config = RunConfig {
        instance,
        policy,
        search,
        local_search: a.local_search,
        seed: a.seed,
        repetitions: a.repetitions,
        output: a.out,
    };
    let rows = run(&config)?;
    if config.output.is_none() {
        std::io::stdout().write_all(csv_string(&rows)?.as_bytes())?;
    }
    Ok(())
}

fn run_bench(a: BenchArgs) -> Result<(), Failure> {
    let manifest = match &a.replay {
        Some(path) => read_manifest(path)?,
        None => {
            let spec = BenchSpec {
                kind: a.kind,
                n: a.n,
                instances: a.instances,
                seed: a.seed,
                budget: a.budget,
                beta: a.beta,
                ngs: a.search.ngs_config(a.seed),
                methods: a.methods.clone(),
                beam_width: a.search.width,
                local_search: a.local_search,
                repetitions: a.repetitions,
            };
            Manifest::new(spec.runs()?)
        }
    };
    let rows = bench(&manifest, &a.out)?;
    summarize(&rows);
    Ok(())
}

fn summarize(rows: &[ngs::cli::BenchmarkRow]) {
    let mut methods: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    methods.sort_unstable();
    methods.dedup();
    for m in methods {
        let mine: Vec<_> = rows.iter().filter(|r| r.method == m).collect();
        let k = mine.len() as f64;
        let reward = mine.iter().map(|r| r.reward).sum::<f64>() / k;
        let time = mine.iter().map(|r| r.time_ms).sum::<f64>() / k;
        let gaps: Vec<f64> = mine.iter().filter_map(|r| r.gap_pct).collect();
        let gap = if gaps.is_empty() {
            "-".to_string()
        } else {
            format!("{:.3}", gaps.iter().sum::<f64>() / gaps.len() as f64)
        };
        println!(
            "{m:<14} rows={:<4} reward={reward:<12.5} gap%={gap:<8} time_ms={time:.1}",
            mine.len()
        );
    }
}

fn instance_of(a: &InstanceArgs) -> Result<RoutingInstance, Failure> {
    let source = a.source().map_err(Failure::Usage)?;
    Ok(load_instance(&source)?)
}

fn oracle(a: InstanceArgs) -> Result<(), Failure> {
    let inst = instance_of(&a)?;
    let Some(res) = exact_optimum(&inst) else {
        return Err(Error::OracleRefused(format!("no exact oracle for {} with n = {}", inst.kind(), inst.n())).into());
    };
    let n = inst.n();
    let mut nodes: Vec<String> = res.argmax.iter().map(|&t| edge_endpoints(n, t).0.to_string()).collect();
    if let Some(&last) = res.argmax.last() {
        nodes.push(edge_endpoints(n, last).1.to_string());
    }
    println!("instance {}", inst.name());
    println!("optimum {}", res.optimum);
    println!("tour {}", nodes.join(","));
    println!("explored {}", res.count_explored);
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let inst = instance_of(&a.instance)?;
    let n = inst.n();
    if let Some(&bad) = a.tour.iter().find(|&&v| v >= n) {
        return Err(Failure::Usage(format!("node {bad} out of range for n = {n}")));
    }
    let mut nodes = a.tour.clone();
    if inst.kind() == Kind::Tsp && nodes.len() > 1 && nodes.first() != nodes.last() {
        nodes.push(nodes[0]);
    }
    let tokens: Vec<_> = nodes.windows(2).map(|w| edge_token(n, w[0], w[1])).collect();
    let sol = decode(&inst, &tokens).map_err(Error::from)?;
    println!("valid objective {}", sol.objective);
    for (i, r) in sol.routes.iter().enumerate() {
        let r: Vec<String> = r.iter().map(usize::to_string).collect();
        println!("route {i}: {}", r.join(","));
    }
    Ok(())
}
