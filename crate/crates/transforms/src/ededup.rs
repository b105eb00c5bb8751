//! Exact deduplication by SHA-256 of the content column.
//!
//! Default mode is single pass: a shared set takes an atomic
//! insert-if-absent per row and the first inserter survives. Deterministic
//! mode runs two passes: the first records, per hash, the smallest
//! `(file, row)` holding it; the second keeps exactly those rows.

use std::sync::Arc;

use dashmap::{DashMap, DashSet};
use dpk_core::{
    BinaryTransform, DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableAdapter, TableOutcome,
    TableTransform, TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};
use sha2::{Digest, Sha256};

use crate::content_column_param;

type Hash = [u8; 32];

fn digest(text: &str) -> Hash {
    Sha256::digest(text.as_bytes()).into()
}

#[derive(Default)]
pub struct DedupState {
    seen: DashSet<Hash>,
    owners: DashMap<Hash, (String, usize)>,
}

impl DedupState {
    /// True if the hash was absent and is now recorded.
    pub fn insert_if_absent(&self, text: &str) -> bool {
        self.seen.insert(digest(text))
    }

    pub fn len(&self) -> usize {
        self.seen.len().max(self.owners.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Stage {
    Single,
    Claim,
    Keep,
}

pub struct EdedupTransform {
    content_column: String,
    state: Arc<DedupState>,
    stage: Stage,
}

impl EdedupTransform {
    pub fn new(content_column: &str, state: Arc<DedupState>) -> Self {
        EdedupTransform { content_column: content_column.to_string(), state, stage: Stage::Single }
    }
}

impl TableTransform for EdedupTransform {
    fn transform(&mut self, table: DocTable, file_name: &str) -> Result<TableOutcome, TransformError> {
        let contents = table
            .strings(&self.content_column)
            .map_err(|_| TransformError::MissingColumn(self.content_column.clone()))?;
        let keep: Vec<bool> = match self.stage {
            Stage::Single => contents.iter().map(|c| self.state.insert_if_absent(c)).collect(),
            Stage::Claim => {
                for (row, c) in contents.iter().enumerate() {
                    let key = (file_name.to_string(), row);
                    self.state
                        .owners
                        .entry(digest(c))
                        .and_modify(|owner| {
                            if key < *owner {
                                *owner = key.clone();
                            }
                        })
                        .or_insert_with(|| key.clone());
                }
                return Ok((Vec::new(), Statistics::new()));
            }
            Stage::Keep => contents
                .iter()
                .enumerate()
                .map(|(row, c)| {
                    self.state.owners.get(&digest(c)).is_some_and(|owner| owner.0 == file_name && owner.1 == row)
                })
                .collect(),
        };
        let rows_in = keep.len();
        let kept = keep.iter().filter(|k| **k).count();
        let mut meta = Statistics::new();
        meta.add("rows_in", rows_in as f64);
        meta.add("rows_dropped", (rows_in - kept) as f64);
        Ok((vec![table.filter(&keep)], meta))
    }
}

struct EdedupJob {
    content_column: String,
    deterministic: bool,
    state: Arc<DedupState>,
}

impl TransformJob for EdedupJob {
    fn passes(&self) -> usize {
        if self.deterministic {
            2
        } else {
            1
        }
    }

    fn create_worker(&self, pass: usize, _worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError> {
        let mut t = EdedupTransform::new(&self.content_column, Arc::clone(&self.state));
        t.stage = match (self.deterministic, pass) {
            (false, _) => Stage::Single,
            (true, 0) => Stage::Claim,
            (true, _) => Stage::Keep,
        };
        Ok(Box::new(TableAdapter::new(t)))
    }
}

pub struct EdedupConfiguration;

impl TransformConfiguration for EdedupConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("ededup").param(content_column_param()).param(ParamDef::optional(
            "deterministic",
            ParamValue::Bool(false),
            "two-pass mode keeping the smallest (file, row) of each duplicate group",
        ))
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        Ok(Box::new(EdedupJob {
            content_column: params.str("content_column").to_string(),
            deterministic: params.bool("deterministic"),
            state: Arc::new(DedupState::default()),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drops_planted_duplicate() {
        let mut t = EdedupTransform::new("contents", Arc::default());
        let (out, meta) = t.transform(DocTable::from_contents(["x", "y", "x"]), "f").unwrap();
        assert_eq!(out[0].strings("contents").unwrap(), ["x", "y"]);
        assert_eq!(meta.get("rows_dropped"), 1.0);
        assert_eq!(meta.get("rows_in"), 3.0);
    }

    #[test]
    fn duplicates_across_calls_share_state() {
        let state = Arc::new(DedupState::default());
        let mut a = EdedupTransform::new("contents", Arc::clone(&state));
        let mut b = EdedupTransform::new("contents", Arc::clone(&state));
        a.transform(DocTable::from_contents(["p", "q"]), "1").unwrap();
        let (out, _) = b.transform(DocTable::from_contents(["q", "r"]), "2").unwrap();
        assert_eq!(out[0].strings("contents").unwrap(), ["r"]);
        assert_eq!(state.len(), 3);
    }

    #[test]
    fn deterministic_mode_keeps_smallest_location() {
        let state = Arc::new(DedupState::default());
        let mut claim = EdedupTransform::new("contents", Arc::clone(&state));
        claim.stage = Stage::Claim;
        // later file processed first
        claim.transform(DocTable::from_contents(["d", "x"]), "b.parquet").unwrap();
        claim.transform(DocTable::from_contents(["x", "x"]), "a.parquet").unwrap();
        let mut keep = EdedupTransform::new("contents", Arc::clone(&state));
        keep.stage = Stage::Keep;
        let (b, _) = keep.transform(DocTable::from_contents(["d", "x"]), "b.parquet").unwrap();
        let (a, _) = keep.transform(DocTable::from_contents(["x", "x"]), "a.parquet").unwrap();
        assert_eq!(b[0].strings("contents").unwrap(), ["d"]);
        assert_eq!(a[0].num_rows(), 1);
    }

    #[test]
    fn missing_column() {
        let mut t = EdedupTransform::new("text", Arc::default());
        assert!(matches!(
            t.transform(DocTable::from_contents(["a"]), "f"),
            Err(TransformError::MissingColumn(c)) if c == "text"
        ));
    }
}
