//! Launcher, orchestrator and file-processor pool for local execution.
//!
//! The orchestrator lists the selected inputs once, builds the transform's
//! shared state ([`TransformJob`]), then runs one or more passes over the
//! same file list. Each pass starts `num_workers` threads that pull file
//! indices from a shared counter, one at a time. Every worker owns its own
//! transform and data-access instance and keeps local statistics that are
//! merged after the pass. Outputs are written only by the final pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use chrono::{DateTime, SecondsFormat, Utc};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::data_access::{DataAccess, DataAccessConfig, DataAccessFactory, FileRef, OutputName};
use crate::error::{RuntimeError, TransformError};
use crate::params::{validate_params, Params, TransformConfigSpec};
use crate::stats::{merge_statistics, Statistics};
use crate::transform::{BinaryTransform, FlushGuard, TransformOutcome};

pub const METADATA_FILE: &str = "metadata.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OnError {
    Abort,
    #[default]
    SkipFile,
}

impl FromStr for OnError {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abort" => Ok(OnError::Abort),
            "skip_file" | "skip" => Ok(OnError::SkipFile),
            other => Err(format!("expected abort or skip_file, got {other:?}")),
        }
    }
}

impl fmt::Display for OnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OnError::Abort => "abort",
            OnError::SkipFile => "skip_file",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeConfig {
    pub num_workers: usize,
    pub seed: u64,
    pub on_error: OnError,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        RuntimeConfig { num_workers: 1, seed: 42, on_error: OnError::SkipFile }
    }
}

impl RuntimeConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.num_workers == 0 {
            return Err(RuntimeError::InvalidConfig("num_workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// What a transform sees of the job when building its shared state.
#[derive(Clone, Debug)]
pub struct JobContext {
    pub num_workers: usize,
    pub seed: u64,
}

/// Names a transform, declares its parameters and builds job state.
pub trait TransformConfiguration: Send + Sync {
    fn spec(&self) -> TransformConfigSpec;

    /// Called once per job, before any worker starts. Whatever the returned
    /// job holds is the shared component published to all workers.
    fn prepare(&self, params: &Params, ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError>;
}

pub trait TransformJob: Send + Sync {
    /// Number of passes over the file list, separated by barriers.
    fn passes(&self) -> usize {
        1
    }

    /// A fresh transform instance for one worker in one pass.
    fn create_worker(&self, pass: usize, worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError>;

    /// Barrier hook run after every worker of `pass` has flushed.
    fn end_pass(&self, _pass: usize) -> Result<Statistics, TransformError> {
        Ok(Statistics::new())
    }

    /// Job-level artifacts written after the last pass.
    fn finalize(&self) -> Result<(Artifacts, Statistics), TransformError> {
        Ok((Vec::new(), Statistics::new()))
    }
}

/// Job-level output files as (relative path, bytes).
pub type Artifacts = Vec<(String, Vec<u8>)>;

/// Everything needed to run one transform job.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub data: DataAccessConfig,
    pub runtime: RuntimeConfig,
    pub transform: String,
    /// Transform parameters keyed by unprefixed name.
    pub params: BTreeMap<String, String>,
}

impl JobSpec {
    pub fn new(transform: &str, data: DataAccessConfig) -> Self {
        JobSpec { data, runtime: RuntimeConfig::default(), transform: transform.to_string(), params: BTreeMap::new() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn workers(mut self, n: usize) -> Self {
        self.runtime.num_workers = n;
        self
    }

    /// Flat flag echo of the data access and runtime configuration.
    pub fn common_flags(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("input_folder".to_string(), self.data.input_path.clone()),
            ("output_folder".to_string(), self.data.output_path.clone()),
            ("extensions".to_string(), self.data.extensions.join(",")),
            ("checkpointing".to_string(), self.data.checkpointing.to_string()),
            ("num_workers".to_string(), self.runtime.num_workers.to_string()),
            ("seed".to_string(), self.runtime.seed.to_string()),
            ("on_error".to_string(), self.runtime.on_error.to_string()),
        ])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobInfo {
    pub transform: String,
    pub start_time: String,
    pub end_time: String,
    pub duration_s: f64,
}

/// Contents of `metadata.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub job: JobInfo,
    pub params: BTreeMap<String, String>,
    pub stats: Statistics,
}

/// Execution backend. Only the local thread pool ships.
pub trait Runtime {
    fn launch(&self, job: &JobSpec, transform: &dyn TransformConfiguration) -> Result<JobReport, RuntimeError>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LocalRuntime;

impl Runtime for LocalRuntime {
    fn launch(&self, job: &JobSpec, transform: &dyn TransformConfiguration) -> Result<JobReport, RuntimeError> {
        launch_with(job, transform)
    }
}

/// Validates everything, runs the job and writes `metadata.json`.
pub fn launch_with(job: &JobSpec, transform: &dyn TransformConfiguration) -> Result<JobReport, RuntimeError> {
    let spec = transform.spec();
    if spec.name != job.transform {
        return Err(RuntimeError::InvalidConfig(format!(
            "job names transform {:?} but configuration is {:?}",
            job.transform, spec.name
        )));
    }
    let params = validate_params(&spec, &job.params)?;
    job.runtime.validate()?;
    job.data.validate()?;

    let started: DateTime<Utc> = Utc::now();
    let clock = Instant::now();
    let ctx = JobContext { num_workers: job.runtime.num_workers, seed: job.runtime.seed };
    let transform_job = transform.prepare(&params, &ctx)?;
    let factory = DataAccessFactory::new(job.data.clone())?;
    let da = factory.create();
    let files = da.files_to_process()?;

    let mut stats = orchestrate(&job.runtime, &factory, transform_job.as_ref(), &files)?;

    let duration = clock.elapsed().as_secs_f64();
    let source_bytes = stats.get("source_size_bytes");
    stats.set("throughput_bytes_s", if duration > 0.0 { source_bytes / duration } else { 0.0 });
    let mut flags = job.common_flags();
    flags.extend(params.to_flags());
    let report = JobReport {
        job: JobInfo {
            transform: spec.name.clone(),
            start_time: started.to_rfc3339_opts(SecondsFormat::Micros, true),
            end_time: Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true),
            duration_s: duration,
        },
        params: flags,
        stats,
    };
    da.write_output_path(METADATA_FILE, &serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

/// Runs every pass of `job` over `files` and returns the merged statistics,
/// including the built-in counters.
pub fn orchestrate(
    runtime: &RuntimeConfig,
    factory: &DataAccessFactory,
    job: &dyn TransformJob,
    files: &[FileRef],
) -> Result<Statistics, RuntimeError> {
    runtime.validate()?;
    let passes = job.passes().max(1);
    let mut total = Statistics::new();
    for key in ["source_files", "source_size_bytes", "result_files", "result_size_bytes", "failed_files"] {
        total.set(key, 0.0);
    }
    total.set("source_files", files.len() as f64);
    total.set("source_size_bytes", files.iter().map(|f| f.size_bytes as f64).sum());

    let mut failed: BTreeSet<String> = BTreeSet::new();
    for pass in 0..passes {
        let pass_clock = Instant::now();
        let outcome = run_pass(runtime, factory, job, files, pass, pass + 1 == passes)?;
        total.merge(&outcome.stats);
        failed.extend(outcome.failed);
        total.merge(&job.end_pass(pass)?);
        if passes > 1 {
            total.set(&format!("pass_{pass}_duration_s"), pass_clock.elapsed().as_secs_f64());
        }
    }

    let (artifacts, extra) = job.finalize()?;
    total.merge(&extra);
    if !artifacts.is_empty() {
        let da = factory.create();
        for (path, bytes) in artifacts {
            let n = da.write_output_path(&path, &bytes)?;
            total.add("result_files", 1.0);
            total.add("result_size_bytes", n as f64);
        }
    }
    total.set("failed_files", failed.len() as f64);
    Ok(total)
}

struct PassOutcome {
    stats: Statistics,
    failed: Vec<String>,
}

fn run_pass(
    runtime: &RuntimeConfig,
    factory: &DataAccessFactory,
    job: &dyn TransformJob,
    files: &[FileRef],
    pass: usize,
    write: bool,
) -> Result<PassOutcome, RuntimeError> {
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let first_error: Mutex<Option<RuntimeError>> = Mutex::new(None);
    let fail = |e: RuntimeError| {
        abort.store(true, Ordering::SeqCst);
        first_error.lock().get_or_insert(e);
    };

    let results: Vec<thread::Result<Option<PassOutcome>>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..runtime.num_workers)
            .map(|w| {
                let worker = Worker {
                    index: w,
                    on_error: runtime.on_error,
                    write,
                    da: factory.create(),
                    stats: Statistics::new(),
                    failed: Vec::new(),
                };
                let (next, abort, fail) = (&next, &abort, &fail);
                thread::Builder::new()
                    .name(format!("worker-{w}"))
                    .spawn_scoped(scope, move || {
                        let transform = match job.create_worker(pass, w) {
                            Ok(t) => t,
                            Err(e) => {
                                fail(e.into());
                                return None;
                            }
                        };
                        match worker.run(FlushGuard::new(transform), files, next, abort) {
                            Ok(done) => Some(done),
                            Err(e) => {
                                fail(e);
                                None
                            }
                        }
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });

    let mut parts = Vec::new();
    let mut failed = Vec::new();
    for (w, r) in results.into_iter().enumerate() {
        match r {
            Ok(Some(done)) => {
                parts.push(done.stats);
                failed.extend(done.failed);
            }
            Ok(None) => {}
            Err(_) => return Err(RuntimeError::WorkerPanicked(w)),
        }
    }
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    Ok(PassOutcome { stats: merge_statistics(&parts), failed })
}

struct Worker {
    index: usize,
    on_error: OnError,
    write: bool,
    da: Box<dyn DataAccess>,
    stats: Statistics,
    failed: Vec<String>,
}

impl Worker {
    fn run<T: BinaryTransform>(
        mut self,
        mut transform: T,
        files: &[FileRef],
        next: &AtomicUsize,
        abort: &AtomicBool,
    ) -> Result<PassOutcome, RuntimeError> {
        while !abort.load(Ordering::SeqCst) {
            let i = next.fetch_add(1, Ordering::SeqCst);
            let Some(file) = files.get(i) else { break };
            if let Err(e) = self.process_file(&mut transform, file) {
                match self.on_error {
                    OnError::Abort => return Err(e),
                    OnError::SkipFile => self.failed.push(file.relative_path.clone()),
                }
            }
        }
        if abort.load(Ordering::SeqCst) {
            return Ok(PassOutcome { stats: self.stats, failed: self.failed });
        }
        let flushed = transform
            .flush_binary()
            .map_err(|e| RuntimeError::File { file: format!("<flush of worker {}>", self.index), source: e })?;
        let flush_stem = format!("flush_w{}", self.index);
        self.record(&flush_stem, flushed)?;
        Ok(PassOutcome { stats: self.stats, failed: self.failed })
    }

    fn process_file<T: BinaryTransform>(&mut self, transform: &mut T, file: &FileRef) -> Result<(), RuntimeError> {
        let as_file_err = |source: TransformError| RuntimeError::File { file: file.relative_path.clone(), source };
        let data = self.da.read_file(file)?;
        let clock = Instant::now();
        let outcome = transform.transform_binary(&file.relative_path, &data).map_err(as_file_err)?;
        self.stats.add("processing_time_s", clock.elapsed().as_secs_f64());
        self.record(&file.relative_path, outcome)
    }

    /// Writes outputs (split-indexed when more than one) and folds metadata.
    fn record(&mut self, base: &str, outcome: TransformOutcome) -> Result<(), RuntimeError> {
        if self.write {
            let split = outcome.outputs.len() > 1;
            for (k, (payload, ext)) in outcome.outputs.iter().enumerate() {
                let mut name = OutputName::new(base, ext.clone());
                if split {
                    name = name.with_split(k);
                }
                let n = self.da.write_output(&name, payload)?;
                self.stats.add("result_files", 1.0);
                self.stats.add("result_size_bytes", n as f64);
            }
        }
        self.stats.merge(&outcome.metadata);
        Ok(())
    }
}

/// Name → configuration lookup for launching by name.
#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, Arc<dyn TransformConfiguration>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, config: impl TransformConfiguration + 'static) -> &mut Self {
        let name = config.spec().name;
        self.entries.insert(name, Arc::new(config));
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn TransformConfiguration>, RuntimeError> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| RuntimeError::UnknownTransform { name: name.to_string(), available: self.names() })
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn launch(&self, job: &JobSpec) -> Result<JobReport, RuntimeError> {
        let config = self.get(&job.transform)?;
        LocalRuntime.launch(job, config.as_ref())
    }
}
