#![allow(dead_code)]

use std::collections::BTreeMap;

use dpk_core::{DataAccessConfig, DocTable, JobReport, JobSpec, MemoryStore};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const IN: &str = "mem/in";
pub const OUT: &str = "mem/out";

/// In-memory input folder holding one Parquet file per table, named `part-NNN.parquet`.
pub fn store_with(tables: &[DocTable]) -> MemoryStore {
    let store = MemoryStore::default();
    for (i, t) in tables.iter().enumerate() {
        store.put(IN, &format!("part-{i:03}.parquet"), t.to_parquet().unwrap());
    }
    store
}

pub fn run(store: &MemoryStore, transform: &str, workers: usize, params: &[(&str, &str)]) -> JobReport {
    try_run(store, transform, workers, params).expect("job failed")
}

pub fn try_run(
    store: &MemoryStore,
    transform: &str,
    workers: usize,
    params: &[(&str, &str)],
) -> Result<JobReport, dpk_core::RuntimeError> {
    run_between(store, IN, OUT, transform, workers, params)
}

pub fn run_between(
    store: &MemoryStore,
    input: &str,
    output: &str,
    transform: &str,
    workers: usize,
    params: &[(&str, &str)],
) -> Result<JobReport, dpk_core::RuntimeError> {
    let mut job = JobSpec::new(transform, DataAccessConfig::memory(store.clone(), input, output)).workers(workers);
    for (k, v) in params {
        job = job.param(k, v);
    }
    dpk_transforms::registry().launch(&job)
}

/// Parquet outputs by relative path.
pub fn outputs(store: &MemoryStore) -> BTreeMap<String, DocTable> {
    store
        .list(OUT)
        .into_iter()
        .filter(|(p, _)| p.ends_with(".parquet"))
        .map(|(p, _)| {
            let t = DocTable::from_parquet(&store.get(OUT, &p).unwrap()).unwrap();
            (p, t)
        })
        .collect()
}

pub fn all_rows(store: &MemoryStore) -> DocTable {
    DocTable::concat(outputs(store).values()).unwrap()
}

/// Random lowercase words.
pub fn vocabulary(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<String> {
    (0..n).map(|_| (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()).collect()
}

pub fn soup(rng: &mut ChaCha8Rng, vocab: &[String], words: usize) -> String {
    (0..words).map(|_| vocab[rng.random_range(0..vocab.len())].as_str()).collect::<Vec<_>>().join(" ")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
