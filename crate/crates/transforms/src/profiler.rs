//! Corpus profile: document, byte and word totals plus the top-k words.
//!
//! Each worker counts locally and merges into a shared accumulator at flush;
//! `profile.json` is written once the job ends. Words are lowercased
//! whitespace-split pieces. Counting is exact, bounded by a cap on distinct
//! words. The transform emits no tables.

use std::collections::HashMap;
use std::sync::Arc;

use dpk_core::{
    Artifacts, BinaryTransform, DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableAdapter,
    TableOutcome, TableTransform, TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::content_column_param;

pub const PROFILE_FILE: &str = "profile.json";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub documents: u64,
    pub total_content_bytes: u64,
    pub total_words: u64,
    pub words: HashMap<String, u64>,
}

impl Counts {
    pub fn add_document(&mut self, text: &str) {
        self.documents += 1;
        self.total_content_bytes += text.len() as u64;
        for w in text.split_whitespace() {
            self.total_words += 1;
            *self.words.entry(w.to_lowercase()).or_insert(0) += 1;
        }
    }

    pub fn merge(&mut self, other: Counts) {
        self.documents += other.documents;
        self.total_content_bytes += other.total_content_bytes;
        self.total_words += other.total_words;
        for (w, c) in other.words {
            *self.words.entry(w).or_insert(0) += c;
        }
    }

    /// Highest counts first, ties by word ascending.
    pub fn top_k(&self, k: usize) -> Vec<(String, u64)> {
        let mut all: Vec<(String, u64)> = self.words.iter().map(|(w, &c)| (w.clone(), c)).collect();
        all.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Profile {
    pub documents: u64,
    pub total_content_bytes: u64,
    pub total_words: u64,
    pub top_k_words: Vec<(String, u64)>,
}

fn cap_error(cap: usize) -> TransformError {
    TransformError::failed(format!("profiler distinct-word cap of {cap} exceeded"))
}

pub struct ProfilerTransform {
    content_column: String,
    max_distinct_words: usize,
    local: Counts,
    shared: Arc<Mutex<Counts>>,
}

impl ProfilerTransform {
    pub fn new(content_column: &str, max_distinct_words: usize, shared: Arc<Mutex<Counts>>) -> Self {
        ProfilerTransform {
            content_column: content_column.to_string(),
            max_distinct_words,
            local: Counts::default(),
            shared,
        }
    }
}

impl TableTransform for ProfilerTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let texts = table
            .strings(&self.content_column)
            .map_err(|_| TransformError::MissingColumn(self.content_column.clone()))?;
        let mut file = Counts::default();
        for t in texts {
            file.add_document(t);
        }
        let new_words = file.words.keys().filter(|w| !self.local.words.contains_key(*w)).count();
        if self.local.words.len() + new_words > self.max_distinct_words {
            return Err(cap_error(self.max_distinct_words));
        }
        self.local.merge(file);
        let mut meta = Statistics::new();
        meta.add("nrows", table.num_rows() as f64);
        Ok((Vec::new(), meta))
    }

    fn flush(&mut self) -> Result<TableOutcome, TransformError> {
        let mut shared = self.shared.lock();
        shared.merge(std::mem::take(&mut self.local));
        if shared.words.len() > self.max_distinct_words {
            return Err(cap_error(self.max_distinct_words));
        }
        Ok((Vec::new(), Statistics::new()))
    }
}

struct ProfilerJob {
    content_column: String,
    top_k: usize,
    max_distinct_words: usize,
    shared: Arc<Mutex<Counts>>,
}

impl TransformJob for ProfilerJob {
    fn create_worker(&self, _pass: usize, _worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError> {
        Ok(Box::new(TableAdapter::new(ProfilerTransform::new(
            &self.content_column,
            self.max_distinct_words,
            Arc::clone(&self.shared),
        ))))
    }

    fn finalize(&self) -> Result<(Artifacts, Statistics), TransformError> {
        let counts = self.shared.lock();
        let profile = Profile {
            documents: counts.documents,
            total_content_bytes: counts.total_content_bytes,
            total_words: counts.total_words,
            top_k_words: counts.top_k(self.top_k),
        };
        let bytes = serde_json::to_vec_pretty(&profile).map_err(|e| TransformError::failed(e.to_string()))?;
        let mut stats = Statistics::new();
        stats.set("distinct_words", counts.words.len() as f64);
        Ok((vec![(PROFILE_FILE.to_string(), bytes)], stats))
    }
}

pub struct ProfilerConfiguration;

impl TransformConfiguration for ProfilerConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("profiler")
            .param(content_column_param())
            .param(ParamDef::optional("top_k", ParamValue::Int(100), "number of most frequent words reported"))
            .param(ParamDef::optional(
                "max_distinct_words",
                ParamValue::Int(10_000_000),
                "fail when more distinct words than this are seen",
            ))
            .validator(|p| {
                if p.int("top_k") < 0 {
                    return Err(p.invalid("top_k", "must be >= 0"));
                }
                if p.int("max_distinct_words") < 1 {
                    return Err(p.invalid("max_distinct_words", "must be >= 1"));
                }
                Ok(())
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        Ok(Box::new(ProfilerJob {
            content_column: params.str("content_column").to_string(),
            top_k: params.int("top_k") as usize,
            max_distinct_words: params.int("max_distinct_words") as usize,
            shared: Arc::default(),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(docs: &[&str]) -> Counts {
        let mut c = Counts::default();
        docs.iter().for_each(|d| c.add_document(d));
        c
    }

    #[test]
    fn ties_break_lexicographically() {
        let c = count(&["a a b", "b"]);
        assert_eq!(c.documents, 2);
        assert_eq!(c.total_words, 4);
        assert_eq!(c.total_content_bytes, 6);
        assert_eq!(c.top_k(10), vec![("a".to_string(), 2), ("b".to_string(), 2)]);
    }

    #[test]
    fn lowercases_and_picks_the_mode() {
        let c = count(&["The the THE cat", "dog the"]);
        assert_eq!(c.top_k(1), vec![("the".to_string(), 4)]);
    }

    #[test]
    fn empty_corpus() {
        let c = count(&[]);
        assert_eq!(c.documents, 0);
        assert!(c.top_k(100).is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let shared = Arc::new(Mutex::new(Counts::default()));
        let mut t = ProfilerTransform::new("contents", 2, shared);
        assert!(t.transform(DocTable::from_contents(["a b"]), "f").is_ok());
        assert!(t.transform(DocTable::from_contents(["c"]), "g").is_err());
    }

    #[test]
    fn workers_merge_at_flush() {
        let shared = Arc::new(Mutex::new(Counts::default()));
        for doc in ["x y", "y z"] {
            let mut t = ProfilerTransform::new("contents", 100, Arc::clone(&shared));
            t.transform(DocTable::from_contents([doc]), "f").unwrap();
            t.flush().unwrap();
        }
        assert_eq!(*shared.lock(), count(&["x y", "y z"]));
    }
}
