//! Batch command-line front end: corpus ingestion (csv/jsonl), pipeline
//! orchestration, JSON results on standard output, and reduction-cache
//! persistence. All diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 cap exceeded
//! (`frechet`/`simplify`/`reduce`; `cluster` warns and falls back instead).

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use klmedian::{
    discrete_frechet, kmedian_pipeline, min_error_simplification, reduce_dataset,
    PipelineConfig, ReductionCache, Solver, TimeSeries, DEFAULT_REDUCTION_CAP,
};

#[derive(Parser)]
#[command(name = "klmedian", version, about = "(k, l)-median clustering of time series \
under the discrete Frechet distance")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input format; inferred from the file extension when omitted.
    #[arg(long, global = true, value_parser = ["csv", "jsonl"])]
    format: Option<String>,

    /// Worker threads (0 or omitted: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print stage timings to standard error.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between the series in two single-series files.
    Frechet {
        /// File holding the first series.
        #[arg(long)]
        a: PathBuf,
        /// File holding the second series.
        #[arg(long)]
        b: PathBuf,
    },
    /// Minimum-error simplification of every series.
    Simplify {
        #[arg(long)]
        input: PathBuf,
        /// Maximum complexity of the simplification.
        #[arg(long)]
        ell: usize,
    },
    /// Distance-preserving complexity reduction of every series.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        /// Query complexity the reduction must preserve distances for.
        #[arg(long)]
        ell: usize,
        /// Distance distortion tolerance, in (0, 1].
        #[arg(long)]
        eps: f64,
        /// Complexity cap for the reduction search.
        #[arg(long, default_value_t = DEFAULT_REDUCTION_CAP)]
        cap: usize,
        /// Reduction cache file to read (if present) and write back.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// (k, l)-median clustering of the corpus.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        /// Number of centers.
        #[arg(long)]
        k: usize,
        /// Maximum center complexity.
        #[arg(long)]
        ell: usize,
        /// Approximation parameter, in (0, 1/2].
        #[arg(long)]
        eps: f64,
        /// Solver: "exhaustive" or "local-search".
        #[arg(long, default_value = "exhaustive")]
        solver: String,
        /// Seed for local search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Complexity cap for the reduction search.
        #[arg(long, default_value_t = DEFAULT_REDUCTION_CAP)]
        cap: usize,
        /// Reduction cache file to read (if present) and write back.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Cap(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Cap(m) => write!(f, "{m}"),
        }
    }
}

fn data_err(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

#[derive(Clone, Copy)]
enum Format {
    Csv,
    Jsonl,
}

struct Corpus {
    entries: Vec<(String, TimeSeries)>,
}

impl Corpus {
    fn series(&self) -> Vec<TimeSeries> {
        self.entries.iter().map(|(_, s)| s.clone()).collect()
    }
}

fn infer_format(path: &Path, flag: &Option<String>) -> Result<Format, CliError> {
    if let Some(f) = flag {
        return match f.as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(CliError::Usage(format!("unknown format {other:?}"))),
        };
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(Format::Csv),
        Some("jsonl") => Ok(Format::Jsonl),
        _ => Err(CliError::Usage(format!(
            "cannot infer input format from {}; pass --format csv|jsonl",
            path.display()
        ))),
    }
}

#[derive(serde::Deserialize)]
struct JsonRow {
    id: String,
    values: Vec<f64>,
}

fn parse_corpus(path: &Path, format: Format) -> Result<Corpus, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| data_err(format!("cannot open {}: {e}", path.display())))?;
    let reader = BufReader::new(file);
    let mut entries: Vec<(String, TimeSeries)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line =
            line.map_err(|e| data_err(format!("{}:{line_no}: {e}", path.display())))?;
        if line.trim().is_empty() {
            return Err(data_err(format!(
                "{}:{line_no}: empty row",
                path.display()
            )));
        }
        let (id, series) = match format {
            Format::Csv => {
                let mut values = Vec::new();
                for field in line.split(',') {
                    let field = field.trim();
                    if field.is_empty() {
                        return Err(data_err(format!(
                            "{}:{line_no}: empty value in row",
                            path.display()
                        )));
                    }
                    let v: f64 = field.parse().map_err(|_| {
                        data_err(format!(
                            "{}:{line_no}: invalid number {field:?}",
                            path.display()
                        ))
                    })?;
                    values.push(v);
                }
                (line_no.to_string(), values)
            }
            Format::Jsonl => {
                let row: JsonRow = serde_json::from_str(&line).map_err(|e| {
                    data_err(format!("{}:{line_no}: {e}", path.display()))
                })?;
                if entries.iter().any(|(id, _)| *id == row.id) {
                    return Err(data_err(format!(
                        "{}:{line_no}: duplicate id {:?}",
                        path.display(),
                        row.id
                    )));
                }
                (row.id, row.values)
            }
        };
        let series = TimeSeries::new(series).map_err(|e| {
            data_err(format!("{}:{line_no}: {e}", path.display()))
        })?;
        entries.push((id, series));
    }
    if entries.is_empty() {
        return Err(data_err(format!("{}: no series", path.display())));
    }
    Ok(Corpus { entries })
}

fn parse_single_series(path: &Path, flag: &Option<String>) -> Result<TimeSeries, CliError> {
    let corpus = parse_corpus(path, infer_format(path, flag)?)?;
    if corpus.entries.len() != 1 {
        return Err(data_err(format!(
            "{}: expected exactly one series, found {}",
            path.display(),
            corpus.entries.len()
        )));
    }
    Ok(corpus.entries.into_iter().next().unwrap().1)
}

fn load_cache(path: &Option<PathBuf>) -> Result<ReductionCache, CliError> {
    match path {
        Some(p) if p.exists() => {
            let (cache, warnings) = ReductionCache::load(p)
                .map_err(|e| data_err(format!("cannot read cache {}: {e}", p.display())))?;
            for w in warnings {
                eprintln!("warning: cache {}: {w}", p.display());
            }
            Ok(cache)
        }
        _ => Ok(ReductionCache::new()),
    }
}

fn save_cache(cache: &ReductionCache, path: &Option<PathBuf>) -> Result<(), CliError> {
    if let Some(p) = path {
        cache
            .save(p)
            .map_err(|e| data_err(format!("cannot write cache {}: {e}", p.display())))?;
    }
    Ok(())
}

struct Timer {
    verbose: bool,
    start: Instant,
}

impl Timer {
    fn new(verbose: bool) -> Self {
        Self {
            verbose,
            start: Instant::now(),
        }
    }

    fn stage(&mut self, name: &str) {
        if self.verbose {
            eprintln!("[time] {name}: {:.3?}", self.start.elapsed());
        }
        self.start = Instant::now();
    }
}

#[derive(Serialize)]
struct DistanceOut {
    distance: f64,
}

#[derive(Serialize)]
struct SimplifyOut<'a> {
    id: &'a str,
    simplified: &'a [f64],
    delta: f64,
}

#[derive(Serialize)]
struct ReduceOut<'a> {
    id: &'a str,
    reduced: &'a [f64],
    original_complexity: usize,
    reduced_complexity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<&'a str>,
}

#[derive(Serialize)]
struct StatsOut {
    cache_hits: usize,
    candidates: usize,
    reduced_max_complexity: usize,
}

#[derive(Serialize)]
struct ClusterOut {
    centers: Vec<Vec<f64>>,
    assignment: serde_json::Map<String, serde_json::Value>,
    cost: f64,
    solver: String,
    stats: StatsOut,
}

fn print_json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<(), CliError> {
    let line = serde_json::to_string(value).expect("output structs serialize");
    writeln!(out, "{line}").map_err(|e| data_err(format!("cannot write output: {e}")))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let mut timer = Timer::new(cli.verbose);

    let code = match &cli.command {
        Command::Frechet { a, b } => {
            let xa = parse_single_series(a, &cli.format)?;
            let xb = parse_single_series(b, &cli.format)?;
            timer.stage("parse");
            let d = discrete_frechet(&xa, &xb).value();
            timer.stage("distance");
            print_json(&mut out, &DistanceOut { distance: d })?;
            0
        }
        Command::Simplify { input, ell } => {
            if *ell < 1 {
                return Err(CliError::Usage("--ell must be at least 1".into()));
            }
            let corpus = parse_corpus(input, infer_format(input, &cli.format)?)?;
            timer.stage("parse");
            for (id, series) in &corpus.entries {
                let simp = min_error_simplification(series, *ell);
                print_json(
                    &mut out,
                    &SimplifyOut {
                        id,
                        simplified: simp.series.values(),
                        delta: simp.error,
                    },
                )?;
            }
            timer.stage("simplify");
            0
        }
        Command::Reduce {
            input,
            ell,
            eps,
            cap,
            cache,
        } => {
            if *ell < 1 {
                return Err(CliError::Usage("--ell must be at least 1".into()));
            }
            if !(*eps > 0.0 && *eps <= 1.0) {
                return Err(CliError::Usage("--eps must lie in (0, 1]".into()));
            }
            if *cap < 1 {
                return Err(CliError::Usage("--cap must be at least 1".into()));
            }
            let corpus = parse_corpus(input, infer_format(input, &cli.format)?)?;
            let cache_store = load_cache(cache)?;
            timer.stage("parse");
            let reductions = reduce_dataset(&corpus.series(), *ell, *eps, *cap, &cache_store);
            timer.stage("reduce");
            let mut capped = 0usize;
            for ((id, series), red) in corpus.entries.iter().zip(&reductions) {
                let warning = if red.capped {
                    capped += 1;
                    Some("complexity cap reached; series kept in canonical quantized form")
                } else {
                    None
                };
                print_json(
                    &mut out,
                    &ReduceOut {
                        id,
                        reduced: red.series.values(),
                        original_complexity: series.complexity(),
                        reduced_complexity: red.series.complexity(),
                        warning,
                    },
                )?;
            }
            save_cache(&cache_store, cache)?;
            timer.stage("write");
            if capped > 0 {
                out.flush()
                    .map_err(|e| data_err(format!("cannot write output: {e}")))?;
                return Err(CliError::Cap(format!(
                    "{capped} series hit the complexity cap"
                )));
            }
            0
        }
        Command::Cluster {
            input,
            k,
            ell,
            eps,
            solver,
            seed,
            cap,
            cache,
        } => {
            if *k < 1 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            if *ell < 1 {
                return Err(CliError::Usage("--ell must be at least 1".into()));
            }
            if !(*eps > 0.0 && *eps <= 0.5) {
                return Err(CliError::Usage("--eps must lie in (0, 1/2]".into()));
            }
            if *cap < 1 {
                return Err(CliError::Usage("--cap must be at least 1".into()));
            }
            let solver: Solver = solver
                .parse()
                .map_err(|e: String| CliError::Usage(e))?;
            let corpus = parse_corpus(input, infer_format(input, &cli.format)?)?;
            let cache_store = load_cache(cache)?;
            timer.stage("parse");

            let cfg = PipelineConfig {
                k: *k,
                l: *ell,
                eps: *eps,
                solver,
                seed: *seed,
                reduction_cap: *cap,
                solve_cap: klmedian::DEFAULT_SOLVE_CAP,
            };
            let outcome = kmedian_pipeline(&corpus.series(), &cfg, &cache_store);
            timer.stage("cluster");

            if let Some(reason) = &outcome.fallback {
                eprintln!("warning: {reason}");
            }
            if outcome.stats.capped_series > 0 {
                eprintln!(
                    "warning: {} series hit the complexity cap during reduction",
                    outcome.stats.capped_series
                );
            }
            let mut assignment = serde_json::Map::new();
            for ((id, _), &center) in corpus.entries.iter().zip(&outcome.solution.assignment) {
                assignment.insert(id.clone(), serde_json::Value::from(center));
            }
            print_json(
                &mut out,
                &ClusterOut {
                    centers: outcome
                        .solution
                        .centers
                        .iter()
                        .map(|c| c.values().to_vec())
                        .collect(),
                    assignment,
                    cost: outcome.solution.cost,
                    solver: outcome.solution.solver_used.to_string(),
                    stats: StatsOut {
                        cache_hits: outcome.stats.cache_hits,
                        candidates: outcome.stats.candidates,
                        reduced_max_complexity: outcome.stats.reduced_max_complexity,
                    },
                },
            )?;
            save_cache(&cache_store, cache)?;
            timer.stage("write");
            0
        }
    };
    out.flush()
        .map_err(|e| data_err(format!("cannot write output: {e}")))?;
    Ok(code)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let threads = cli.threads.unwrap_or(0);
    let outcome = if threads >= 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Usage(format!("cannot build thread pool: {e}"))),
        }
    } else {
        run(cli)
    };

    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            let prefix = match err {
                CliError::Cap(_) => "warning",
                _ => "error",
            };
            eprintln!("{prefix}: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
