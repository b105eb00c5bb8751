//! Throughput benchmark over a generated corpus.
//!
//! Each (transform, workers) cell runs `repeats` times into a scratch folder;
//! the median wall time is reported. Results are appended to a JSON array
//! file and optionally to a CSV file. `fdedup` reads a copy of the corpus
//! annotated by `doc_id`, prepared once and not timed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dpk_core::{DataAccessConfig, JobSpec, Registry, PARQUET_EXT};
use serde::{Deserialize, Serialize};

use crate::generate::{Truth, TRUTH_FILE};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    /// Row-wise annotation.
    C1,
    /// Row-set manipulation: dedup, filtering, repacking.
    C2,
    /// Per-document model inference.
    C3,
}

pub fn category(transform: &str) -> Category {
    match transform {
        "ededup" | "fdedup" | "resize" | "filter" => Category::C2,
        "lang_id" | "tokenizer" => Category::C3,
        _ => Category::C1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub transform: String,
    pub category: Category,
    pub workers: usize,
    pub corpus_bytes: u64,
    pub corpus_seed: Option<u64>,
    pub repeats: usize,
    pub walls: Vec<f64>,
    /// Median of `walls`; absent when a run failed.
    pub wall_s: Option<f64>,
    pub throughput_mb_s: Option<f64>,
    /// Median `pass_{i}_duration_s` per pass, for multi-pass transforms.
    pub pass_s: BTreeMap<String, f64>,
    pub cores: usize,
    pub timestamp: String,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub corpus: PathBuf,
    pub transforms: Vec<String>,
    pub workers: Vec<usize>,
    pub repeats: usize,
    /// Extra transform params, unprefixed, per transform.
    pub params: BTreeMap<String, BTreeMap<String, String>>,
    pub output: PathBuf,
    pub csv: Option<PathBuf>,
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Total size of the Parquet files directly under `dir`.
pub fn corpus_bytes(dir: &Path) -> Result<u64, CliError> {
    let mut total = 0;
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        if entry.path().extension().is_some_and(|x| format!(".{}", x.to_string_lossy()) == PARQUET_EXT) {
            total += entry.metadata().map_err(|e| CliError::io(&entry.path(), e))?.len();
        }
    }
    Ok(total)
}

fn default_params(transform: &str) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    match transform {
        "resize" => {
            p.insert("max_rows_per_table".into(), "1000".into());
        }
        "filter" => {
            p.insert("expr".into(), "contents CONTAINS 'a'".into());
        }
        _ => {}
    }
    p
}

fn job(transform: &str, input: &Path, output: &Path, workers: usize, params: &BTreeMap<String, String>) -> JobSpec {
    let mut job = JobSpec::new(transform, DataAccessConfig::local(input.to_string_lossy(), output.to_string_lossy()))
        .workers(workers);
    job.params = params.clone();
    job
}

struct Cell<'a> {
    transform: &'a str,
    input: &'a Path,
    params: BTreeMap<String, String>,
}

fn run_cell(
    registry: &Registry,
    cell: &Cell,
    workers: usize,
    repeats: usize,
    scratch: &Path,
) -> (Vec<f64>, BTreeMap<String, f64>, Option<String>) {
    let mut walls = Vec::new();
    let mut passes: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in 0..repeats {
        let out = scratch.join(format!("{}_w{workers}_r{r}", cell.transform));
        let started = Instant::now();
        let result = registry.launch(&job(cell.transform, cell.input, &out, workers, &cell.params));
        let wall = started.elapsed().as_secs_f64();
        let _ = fs::remove_dir_all(&out);
        match result {
            Ok(report) => {
                walls.push(wall);
                for (k, v) in report.stats.iter() {
                    if k.starts_with("pass_") && k.ends_with("_duration_s") {
                        passes.entry(k.to_string()).or_default().push(v);
                    }
                }
            }
            Err(e) => return (walls, BTreeMap::new(), Some(e.to_string())),
        }
    }
    let pass_s = passes.into_iter().map(|(k, v)| (k, median(&v))).collect();
    (walls, pass_s, None)
}

/// Runs every cell, appends the results to `cfg.output` and returns them.
pub fn run_bench(cfg: &BenchConfig, registry: &Registry) -> Result<Vec<BenchResult>, CliError> {
    if cfg.repeats == 0 || cfg.workers.is_empty() || cfg.workers.contains(&0) || cfg.transforms.is_empty() {
        return Err(CliError::Usage("need at least one transform, positive worker counts and repeats >= 1".into()));
    }
    for t in &cfg.transforms {
        registry.get(t)?;
    }
    let seed = fs::read(cfg.corpus.join(TRUTH_FILE))
        .ok()
        .and_then(|b| serde_json::from_slice::<Truth>(&b).ok())
        .map(|t| t.spec.seed);
    let scratch = tempfile::tempdir().map_err(|e| CliError::io(Path::new("tempdir"), e))?;

    let mut annotated: Option<PathBuf> = None;
    let mut results = Vec::new();
    for t in &cfg.transforms {
        let input = if t == "fdedup" {
            if annotated.is_none() {
                let dir = scratch.path().join("annotated");
                registry.launch(&job("doc_id", &cfg.corpus, &dir, 1, &BTreeMap::new()))?;
                annotated = Some(dir);
            }
            annotated.clone().unwrap()
        } else {
            cfg.corpus.clone()
        };
        let bytes = corpus_bytes(&input)?;
        let mut params = default_params(t);
        params.extend(cfg.params.get(t).cloned().unwrap_or_default());
        let cell = Cell { transform: t, input: &input, params };
        for &w in &cfg.workers {
            let (walls, pass_s, error) = run_cell(registry, &cell, w, cfg.repeats, scratch.path());
            let wall_s = error.is_none().then(|| median(&walls));
            results.push(BenchResult {
                transform: t.clone(),
                category: category(t),
                workers: w,
                corpus_bytes: bytes,
                corpus_seed: seed,
                repeats: cfg.repeats,
                walls,
                wall_s,
                throughput_mb_s: wall_s.map(|s| bytes as f64 / (1024.0 * 1024.0) / s),
                pass_s,
                cores: cores(),
                timestamp: chrono::Utc::now().to_rfc3339(),
                error,
            });
        }
    }
    append_results(&cfg.output, &results)?;
    if let Some(csv) = &cfg.csv {
        append_csv(csv, &results)?;
    }
    Ok(results)
}

/// Appends to the JSON array in `path`, creating it when absent.
pub fn append_results(path: &Path, results: &[BenchResult]) -> Result<(), CliError> {
    let mut all: Vec<serde_json::Value> = match fs::read(path) {
        Ok(b) => serde_json::from_slice(&b)
            .map_err(|e| CliError::Usage(format!("{} is not a JSON array of results: {e}", path.display())))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(CliError::io(path, e)),
    };
    for r in results {
        all.push(serde_json::to_value(r).expect("results serialize"));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let json = serde_json::to_vec_pretty(&all).expect("results serialize");
    fs::write(path, json).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    timestamp: &'a str,
    transform: &'a str,
    category: Category,
    workers: usize,
    corpus_bytes: u64,
    repeats: usize,
    wall_s: Option<f64>,
    throughput_mb_s: Option<f64>,
    cores: usize,
    error: Option<&'a str>,
}

pub fn append_csv(path: &Path, results: &[BenchResult]) -> Result<(), CliError> {
    let exists = path.exists();
    let file = fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(!exists).from_writer(file);
    for r in results {
        w.serialize(CsvRow {
            timestamp: &r.timestamp,
            transform: &r.transform,
            category: r.category,
            workers: r.workers,
            corpus_bytes: r.corpus_bytes,
            repeats: r.repeats,
            wall_s: r.wall_s,
            throughput_mb_s: r.throughput_mb_s,
            cores: r.cores,
            error: r.error.as_deref(),
        })
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
