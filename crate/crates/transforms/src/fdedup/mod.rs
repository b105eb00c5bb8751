//! Fuzzy deduplication with MinHash and LSH.
//!
//! Runs as two passes over the file list with a barrier between them:
//!
//! 1. Signature pass: per row, word shingles, a MinHash signature and its
//!    band keys, inserted into shared band buckets.
//! 2. At the barrier: every co-bucketed pair becomes a candidate; with
//!    verification on, only pairs whose exact shingle Jaccard reaches the
//!    threshold are kept. Kept pairs are merged in a union-find.
//! 3. Filter pass: rows whose id is a non-representative cluster member are
//!    dropped. The representative is the smallest id.
//!
//! `clusters.json` lists every cluster as `[rep_id, member_id, ...]`.

pub mod lsh;
pub mod minhash;
pub mod shingle;
pub mod union_find;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use dashmap::{DashMap, DashSet};
use dpk_core::{
    Artifacts, BinaryTransform, DocTable, JobContext, ParamDef, ParamType, ParamValue, Params, Statistics,
    TableAdapter, TableOutcome, TableTransform, TransformConfigSpec, TransformConfiguration, TransformError,
    TransformJob,
};
use parking_lot::RwLock;
use serde::Serialize;

use crate::content_column_param;
pub use lsh::{band_keys, candidate_probability, implied_threshold, lsh_bands};
pub use minhash::Permutations;
pub use shingle::{jaccard, shingle, STABLE_HASH};
pub use union_find::UnionFind;

pub const CLUSTERS_FILE: &str = "clusters.json";

#[derive(Clone, Debug)]
pub struct FdedupParams {
    pub num_permutations: usize,
    pub threshold: f64,
    pub shingles_size: usize,
    pub verify_candidates: bool,
    pub seed: u64,
    pub id_column: String,
    pub content_column: String,
}

impl Default for FdedupParams {
    fn default() -> Self {
        FdedupParams {
            num_permutations: 64,
            threshold: 0.8,
            shingles_size: 5,
            verify_candidates: true,
            seed: 42,
            id_column: "int_id_column".into(),
            content_column: "contents".into(),
        }
    }
}

/// Shared dedup state: band buckets, shingle sets for verification, and
/// the drop set computed at the barrier.
pub struct FdedupState {
    params: FdedupParams,
    bands: usize,
    rows: usize,
    perms: Permutations,
    buckets: DashMap<u64, Vec<i64>>,
    shingles: DashMap<i64, Vec<u64>>,
    ids: DashSet<i64>,
    dropped: RwLock<HashSet<i64>>,
    clusters: RwLock<Vec<Vec<i64>>>,
}

impl FdedupState {
    pub fn new(params: FdedupParams) -> Result<Self, TransformError> {
        let (bands, rows) = lsh_bands(params.threshold, params.num_permutations)
            .ok_or_else(|| TransformError::failed("num_permutations must be >= 1"))?;
        Ok(FdedupState {
            perms: Permutations::new(params.num_permutations, params.seed),
            params,
            bands,
            rows,
            buckets: DashMap::new(),
            shingles: DashMap::new(),
            ids: DashSet::new(),
            dropped: RwLock::new(HashSet::new()),
            clusters: RwLock::new(Vec::new()),
        })
    }

    pub fn bands(&self) -> (usize, usize) {
        (self.bands, self.rows)
    }

    /// Records one document; returns false if it has no shingles.
    pub fn add_document(&self, id: i64, text: &str) -> Result<bool, TransformError> {
        if !self.ids.insert(id) {
            return Err(TransformError::InvalidInput(format!(
                "duplicate id {id} in column {:?}",
                self.params.id_column
            )));
        }
        let sh = shingle(text, self.params.shingles_size);
        let Some(sig) = self.perms.signature(&sh) else {
            return Ok(false);
        };
        for key in band_keys(&sig, self.bands, self.rows) {
            self.buckets.entry(key).or_default().push(id);
        }
        if self.params.verify_candidates {
            self.shingles.insert(id, sh);
        }
        Ok(true)
    }

    /// Candidate generation, verification and clustering.
    pub fn cluster(&self) -> Statistics {
        let mut candidates: HashSet<(i64, i64)> = HashSet::new();
        for entry in self.buckets.iter() {
            let mut members = entry.value().clone();
            if members.len() < 2 {
                continue;
            }
            members.sort_unstable();
            for i in 0..members.len() {
                for j in i + 1..members.len() {
                    candidates.insert((members[i], members[j]));
                }
            }
        }
        let mut candidates: Vec<(i64, i64)> = candidates.into_iter().collect();
        candidates.sort_unstable();
        let kept: Vec<(i64, i64)> = if self.params.verify_candidates {
            candidates
                .iter()
                .copied()
                .filter(|(a, b)| {
                    let (sa, sb) = (self.shingles.get(a), self.shingles.get(b));
                    match (sa, sb) {
                        (Some(sa), Some(sb)) => jaccard(&sa, &sb) >= self.params.threshold,
                        _ => false,
                    }
                })
                .collect()
        } else {
            candidates.clone()
        };

        let mut ids: Vec<i64> = kept.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<i64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut uf = UnionFind::new(ids.len());
        for (a, b) in &kept {
            uf.union(index[a], index[b]);
        }
        let groups: Vec<Vec<i64>> = uf.groups().into_iter().map(|g| g.into_iter().map(|i| ids[i]).collect()).collect();
        let mut dropped = HashSet::new();
        for g in &groups {
            dropped.extend(g[1..].iter().copied());
        }

        let mut stats = Statistics::new();
        stats.add("candidates", candidates.len() as f64);
        stats.add("verified_pairs", kept.len() as f64);
        stats.add("clusters", groups.len() as f64);
        *self.dropped.write() = dropped;
        *self.clusters.write() = groups;
        stats
    }

    pub fn is_dropped(&self, id: i64) -> bool {
        self.dropped.read().contains(&id)
    }

    pub fn clusters(&self) -> Vec<Vec<i64>> {
        self.clusters.read().clone()
    }
}

#[derive(Serialize)]
struct ClusterReport<'a> {
    clusters: &'a [Vec<i64>],
    shingle_unit: &'static str,
    shingles_size: usize,
    hash: &'static str,
    bands: usize,
    rows: usize,
}

pub struct FdedupTransform {
    state: Arc<FdedupState>,
    signature_pass: bool,
}

impl FdedupTransform {
    pub fn signature_pass(state: Arc<FdedupState>) -> Self {
        FdedupTransform { state, signature_pass: true }
    }

    pub fn filter_pass(state: Arc<FdedupState>) -> Self {
        FdedupTransform { state, signature_pass: false }
    }
}

impl TableTransform for FdedupTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let p = &self.state.params;
        let ids = table.int64s(&p.id_column).map_err(|_| TransformError::MissingColumn(p.id_column.clone()))?;
        let mut meta = Statistics::new();
        if self.signature_pass {
            let contents = table
                .strings(&p.content_column)
                .map_err(|_| TransformError::MissingColumn(p.content_column.clone()))?;
            let mut missing = 0;
            for (&id, text) in ids.iter().zip(contents) {
                if !self.state.add_document(id, text)? {
                    missing += 1;
                }
            }
            meta.add("docs_no_signature", missing as f64);
            return Ok((Vec::new(), meta));
        }
        let keep: Vec<bool> = ids.iter().map(|&id| !self.state.is_dropped(id)).collect();
        let kept = keep.iter().filter(|k| **k).count();
        meta.add("docs_in", ids.len() as f64);
        meta.add("docs_dropped", (ids.len() - kept) as f64);
        Ok((vec![table.filter(&keep)], meta))
    }
}

struct FdedupJob {
    state: Arc<FdedupState>,
}

impl TransformJob for FdedupJob {
    fn passes(&self) -> usize {
        2
    }

    fn create_worker(&self, pass: usize, _worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError> {
        let state = Arc::clone(&self.state);
        let t = if pass == 0 { FdedupTransform::signature_pass(state) } else { FdedupTransform::filter_pass(state) };
        Ok(Box::new(TableAdapter::new(t)))
    }

    fn end_pass(&self, pass: usize) -> Result<Statistics, TransformError> {
        if pass == 0 {
            Ok(self.state.cluster())
        } else {
            Ok(Statistics::new())
        }
    }

    fn finalize(&self) -> Result<(Artifacts, Statistics), TransformError> {
        let clusters = self.state.clusters();
        let report = ClusterReport {
            clusters: &clusters,
            shingle_unit: "word",
            shingles_size: self.state.params.shingles_size,
            hash: STABLE_HASH,
            bands: self.state.bands,
            rows: self.state.rows,
        };
        let bytes = serde_json::to_vec(&report).map_err(|e| TransformError::failed(e.to_string()))?;
        let mut stats = Statistics::new();
        stats.set("lsh_bands", self.state.bands as f64);
        stats.set("lsh_rows", self.state.rows as f64);
        Ok((vec![(CLUSTERS_FILE.to_string(), bytes)], stats))
    }
}

pub struct FdedupConfiguration;

impl FdedupConfiguration {
    pub fn to_params(params: &Params, ctx: &JobContext) -> FdedupParams {
        FdedupParams {
            num_permutations: params.int("num_permutations") as usize,
            threshold: params.float("threshold"),
            shingles_size: params.int("shingles_size") as usize,
            verify_candidates: params.bool("verify_candidates"),
            seed: params.opt_int("seed").map_or(ctx.seed, |s| s as u64),
            id_column: params.str("id_column").to_string(),
            content_column: params.str("content_column").to_string(),
        }
    }
}

impl TransformConfiguration for FdedupConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("fdedup")
            .param(content_column_param())
            .param(ParamDef::optional(
                "id_column",
                ParamValue::Str("int_id_column".into()),
                "unique integer document id column (see doc_id)",
            ))
            .param(ParamDef::optional("num_permutations", ParamValue::Int(64), "MinHash permutations"))
            .param(ParamDef::optional("threshold", ParamValue::Float(0.8), "Jaccard similarity threshold"))
            .param(ParamDef::optional("shingles_size", ParamValue::Int(5), "words per shingle"))
            .param(ParamDef::optional(
                "verify_candidates",
                ParamValue::Bool(true),
                "recheck candidate pairs with exact Jaccard",
            ))
            .param(ParamDef::maybe("seed", ParamType::Int, "permutation seed (defaults to the job seed)"))
            .validator(|p| {
                if p.int("num_permutations") < 1 {
                    return Err(p.invalid("num_permutations", "must be >= 1"));
                }
                let t = p.float("threshold");
                if !(t > 0.0 && t <= 1.0) {
                    return Err(p.invalid("threshold", "must be in (0, 1]"));
                }
                if p.int("shingles_size") < 1 {
                    return Err(p.invalid("shingles_size", "must be >= 1"));
                }
                if p.opt_int("seed").is_some_and(|s| s < 0) {
                    return Err(p.invalid("seed", "must be >= 0"));
                }
                Ok(())
            })
    }

    fn prepare(&self, params: &Params, ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let state = FdedupState::new(Self::to_params(params, ctx))?;
        Ok(Box::new(FdedupJob { state: Arc::new(state) }))
    }
}
