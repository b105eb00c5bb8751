use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use dpk_core::*;
use parking_lot::Mutex;

type Log = Arc<Mutex<Vec<(usize, usize, String)>>>;

/// Identity over bytes that records (pass, worker, file) and flush calls.
#[derive(Clone, Default)]
struct Recorder {
    log: Log,
    flushes: Arc<Mutex<Vec<(usize, usize)>>>,
    passes: usize,
    ends: Arc<Mutex<Vec<usize>>>,
}

struct RecorderWorker {
    pass: usize,
    worker: usize,
    job: Recorder,
    split: bool,
    delay: Duration,
}

impl BinaryTransform for RecorderWorker {
    fn transform_binary(&mut self, file_name: &str, data: &[u8]) -> Result<TransformOutcome, TransformError> {
        if data.starts_with(b"BAD") {
            return Err(TransformError::InvalidInput("bad payload".into()));
        }
        if data.starts_with(b"PANIC") {
            panic!("boom");
        }
        thread::sleep(self.delay);
        self.job.log.lock().push((self.pass, self.worker, file_name.to_string()));
        let mut out = TransformOutcome::single(data.to_vec(), ".bin");
        if self.split {
            out.outputs.push((data.to_vec(), ".bin".into()));
        }
        out.metadata.add("calls", 1.0);
        Ok(out)
    }

    fn flush_binary(&mut self) -> Result<TransformOutcome, TransformError> {
        self.job.flushes.lock().push((self.pass, self.worker));
        Ok(TransformOutcome::empty())
    }
}

struct RecorderJob {
    state: Recorder,
    split: bool,
    delay: Duration,
}

impl TransformJob for RecorderJob {
    fn passes(&self) -> usize {
        self.state.passes.max(1)
    }

    fn create_worker(&self, pass: usize, worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError> {
        Ok(Box::new(RecorderWorker { pass, worker, job: self.state.clone(), split: self.split, delay: self.delay }))
    }

    fn end_pass(&self, pass: usize) -> Result<Statistics, TransformError> {
        self.state.ends.lock().push(pass);
        Ok(Statistics::new())
    }
}

impl TransformConfiguration for Recorder {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("recorder")
            .param(ParamDef::optional("split", ParamValue::Bool(false), "emit two outputs per file"))
            .param(ParamDef::optional("delay_ms", ParamValue::Int(0), "sleep per file"))
            .validator(
                |p| {
                    if p.int("delay_ms") < 0 {
                        Err(p.invalid("delay_ms", "must be non-negative"))
                    } else {
                        Ok(())
                    }
                },
            )
    }

    fn prepare(&self, params: &Params, _: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        Ok(Box::new(RecorderJob {
            state: self.clone(),
            split: params.bool("split"),
            delay: Duration::from_millis(params.int("delay_ms") as u64),
        }))
    }
}

fn corpus(n: usize) -> MemoryStore {
    let store = MemoryStore::default();
    for i in 0..n {
        store.put("in", &format!("f{i:02}.bin"), format!("file {i}").into_bytes());
    }
    store
}

fn job(store: &MemoryStore) -> JobSpec {
    JobSpec::new("recorder", DataAccessConfig::memory(store.clone(), "in", "out").with_extensions([".bin"]))
}

#[test]
fn identity_job_over_five_files() {
    let store = corpus(5);
    let rec = Recorder::default();
    let report = LocalRuntime.launch(&job(&store), &rec).unwrap();
    assert_eq!(report.stats.get("source_files"), 5.0);
    assert_eq!(report.stats.get("result_files"), 5.0);
    assert_eq!(report.stats.get("calls"), 5.0);
    assert_eq!(report.stats.get("failed_files"), 0.0);
    assert!(report.stats.contains("processing_time_s"));
    for i in 0..5 {
        let name = format!("f{i:02}.bin");
        assert_eq!(store.get("out", &name), store.get("in", &name));
    }
    let written: JobReport = serde_json::from_slice(&store.get("out", METADATA_FILE).unwrap()).unwrap();
    assert_eq!(written.stats.get("source_files"), 5.0);
    assert_eq!(written.job.transform, "recorder");
}

#[test]
fn exactly_once_dispatch_and_single_flush() {
    let store = corpus(10);
    let rec = Recorder::default();
    let mut spec = job(&store).workers(3).param("delay_ms", 5);
    spec.runtime.seed = 7;
    LocalRuntime.launch(&spec, &rec).unwrap();

    let log = rec.log.lock().clone();
    let mut per_worker: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (_, w, f) in &log {
        assert!(per_worker.entry(*w).or_default().insert(f.clone()), "{f} twice on worker {w}");
    }
    let mut union = BTreeSet::new();
    let mut total = 0;
    for files in per_worker.values() {
        total += files.len();
        union.extend(files.iter().cloned());
    }
    let expected: BTreeSet<String> = (0..10).map(|i| format!("f{i:02}.bin")).collect();
    assert_eq!(union, expected);
    assert_eq!(total, 10, "worker file sets must be disjoint");

    let mut flushes = rec.flushes.lock().clone();
    flushes.sort();
    assert_eq!(flushes, vec![(0, 0), (0, 1), (0, 2)]);
}

#[test]
fn zero_files_still_flushes_every_worker() {
    let store = MemoryStore::default();
    let rec = Recorder::default();
    let report = LocalRuntime.launch(&job(&store).workers(2), &rec).unwrap();
    assert_eq!(report.stats.get("source_files"), 0.0);
    assert_eq!(report.stats.get("result_files"), 0.0);
    assert_eq!(rec.flushes.lock().len(), 2);
    assert!(store.get("out", METADATA_FILE).is_some());
}

#[test]
fn split_outputs_get_indices() {
    let store = corpus(1);
    let report = LocalRuntime.launch(&job(&store).param("split", true), &Recorder::default()).unwrap();
    assert_eq!(report.stats.get("result_files"), 2.0);
    assert!(store.get("out", "f00_0.bin").is_some());
    assert!(store.get("out", "f00_1.bin").is_some());
    assert!(store.get("out", "f00.bin").is_none());
}

#[test]
fn skip_file_counts_failures_and_continues() {
    let store = corpus(4);
    store.put("in", "f01.bin", b"BAD".to_vec());
    let report = LocalRuntime.launch(&job(&store), &Recorder::default()).unwrap();
    assert_eq!(report.stats.get("failed_files"), 1.0);
    assert_eq!(report.stats.get("result_files"), 3.0);
}

#[test]
fn abort_propagates_first_file_error() {
    let store = corpus(4);
    store.put("in", "f01.bin", b"BAD".to_vec());
    let mut spec = job(&store);
    spec.runtime.on_error = OnError::Abort;
    match LocalRuntime.launch(&spec, &Recorder::default()) {
        Err(RuntimeError::File { file, .. }) => assert_eq!(file, "f01.bin"),
        other => panic!("expected file error, got {other:?}"),
    }
    assert!(store.get("out", METADATA_FILE).is_none());
}

#[test]
fn worker_panic_fails_job() {
    let store = corpus(3);
    store.put("in", "f02.bin", b"PANIC".to_vec());
    let err = LocalRuntime.launch(&job(&store), &Recorder::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::WorkerPanicked(0)));
    // outputs written before the crash stay in place
    assert!(store.get("out", "f00.bin").is_some());
}

#[test]
fn checkpointed_rerun_processes_only_missing_outputs() {
    let store = corpus(5);
    let rec = Recorder::default();
    LocalRuntime.launch(&job(&store), &rec).unwrap();
    store.remove("out", "f01.bin");
    store.remove("out", "f03.bin");
    let mut spec = job(&store);
    spec.data.checkpointing = true;
    let report = LocalRuntime.launch(&spec, &rec).unwrap();
    assert_eq!(report.stats.get("source_files"), 2.0);
    assert!(store.get("out", "f01.bin").is_some());
    assert!(store.get("out", "f03.bin").is_some());
}

#[test]
fn validation_failure_touches_nothing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("in")).unwrap();
    let out = dir.path().join("out");
    let spec = JobSpec::new(
        "recorder",
        DataAccessConfig::local(dir.path().join("in").to_str().unwrap(), out.to_str().unwrap()),
    )
    .param("delay_ms", -1);
    let err = LocalRuntime.launch(&spec, &Recorder::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::Config(_)), "{err:?}");
    assert!(!out.exists());

    let spec = spec.param("delay_ms", 0).workers(0);
    assert!(matches!(LocalRuntime.launch(&spec, &Recorder::default()), Err(RuntimeError::InvalidConfig(_))));
    assert!(!out.exists());
}

#[test]
fn multi_pass_writes_only_on_final_pass() {
    let store = corpus(3);
    let rec = Recorder { passes: 2, ..Default::default() };
    let report = LocalRuntime.launch(&job(&store).workers(2), &rec).unwrap();
    assert_eq!(*rec.ends.lock(), vec![0, 1]);
    assert_eq!(report.stats.get("result_files"), 3.0);
    assert_eq!(report.stats.get("calls"), 6.0);
    assert!(report.stats.contains("pass_0_duration_s"));
    let log = rec.log.lock();
    assert_eq!(log.iter().filter(|(p, _, _)| *p == 0).count(), 3);
    assert_eq!(log.iter().filter(|(p, _, _)| *p == 1).count(), 3);
    let flushes = rec.flushes.lock();
    assert_eq!(flushes.len(), 4);
}

#[test]
fn registry_reports_unknown_names() {
    let mut reg = Registry::new();
    reg.register(Recorder::default());
    match reg.get("nosuch") {
        Err(RuntimeError::UnknownTransform { available, .. }) => assert_eq!(available, ["recorder"]),
        Err(e) => panic!("{e:?}"),
        Ok(_) => panic!("lookup of unknown transform succeeded"),
    }
    let store = corpus(2);
    assert_eq!(reg.launch(&job(&store)).unwrap().stats.get("result_files"), 2.0);
}
