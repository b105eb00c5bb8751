//! Document identification: a job-unique integer and a SHA-256 content hash
//! per row.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use dpk_core::{
    BinaryTransform, ColumnData, DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableAdapter,
    TableOutcome, TableTransform, TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};
use sha2::{Digest, Sha256};

use crate::content_column_param;

/// Ids are handed to workers in blocks of this size.
pub const ID_BLOCK: i64 = 1000;

/// Lowercase hex SHA-256 of the UTF-8 bytes of `text`.
pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Shared block allocator. Each call to [`IdAllocator::block`] returns a
/// disjoint `[start, start + ID_BLOCK)` range.
#[derive(Debug)]
pub struct IdAllocator {
    start: i64,
    next_block: AtomicI64,
}

impl IdAllocator {
    pub fn new(start: i64) -> Self {
        IdAllocator { start, next_block: AtomicI64::new(0) }
    }

    pub fn block(&self) -> (i64, i64) {
        let b = self.next_block.fetch_add(1, Ordering::SeqCst);
        let lo = self.start + b * ID_BLOCK;
        (lo, lo + ID_BLOCK)
    }
}

pub struct DocIdTransform {
    content_column: String,
    int_column: String,
    hash_column: String,
    ids: Arc<IdAllocator>,
    next: i64,
    end: i64,
}

impl DocIdTransform {
    pub fn new(params: &Params, ids: Arc<IdAllocator>) -> Self {
        DocIdTransform {
            content_column: params.str("content_column").to_string(),
            int_column: params.str("int_column").to_string(),
            hash_column: params.str("hash_column").to_string(),
            ids,
            next: 0,
            end: 0,
        }
    }

    fn next_id(&mut self) -> i64 {
        if self.next == self.end {
            (self.next, self.end) = self.ids.block();
        }
        let id = self.next;
        self.next += 1;
        id
    }
}

impl TableTransform for DocIdTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let contents = table
            .strings(&self.content_column)
            .map_err(|_| TransformError::MissingColumn(self.content_column.clone()))?;
        let hashes: Vec<String> = contents.iter().map(|c| content_hash(c)).collect();
        let ids: Vec<i64> = (0..table.num_rows()).map(|_| self.next_id()).collect();
        let rows = table.num_rows();
        let table = table
            .with_column(&self.hash_column, ColumnData::String(hashes))?
            .with_column(&self.int_column, ColumnData::Int64(ids))?;
        let mut meta = Statistics::new();
        meta.add("nrows", rows as f64);
        Ok((vec![table], meta))
    }
}

struct DocIdJob {
    params: Params,
    ids: Arc<IdAllocator>,
}

impl TransformJob for DocIdJob {
    fn create_worker(&self, _pass: usize, _worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError> {
        Ok(Box::new(TableAdapter::new(DocIdTransform::new(&self.params, Arc::clone(&self.ids)))))
    }
}

pub struct DocIdConfiguration;

impl TransformConfiguration for DocIdConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("doc_id")
            .param(content_column_param())
            .param(ParamDef::optional(
                "int_column",
                ParamValue::Str("int_id_column".into()),
                "column receiving the integer id",
            ))
            .param(ParamDef::optional(
                "hash_column",
                ParamValue::Str("document_id".into()),
                "column receiving the content hash",
            ))
            .param(ParamDef::optional("id_start", ParamValue::Int(0), "first integer id"))
            .validator(|p| {
                let (i, h) = (p.str("int_column"), p.str("hash_column"));
                if i.is_empty() || h.is_empty() {
                    return Err(p.invalid("int_column", "column names must be non-empty"));
                }
                if i == h {
                    return Err(p.invalid("hash_column", "must differ from doc_id_int_column"));
                }
                if p.int("id_start") < 0 {
                    return Err(p.invalid("id_start", "must be >= 0"));
                }
                Ok(())
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        Ok(Box::new(DocIdJob { params: params.clone(), ids: Arc::new(IdAllocator::new(params.int("id_start"))) }))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use dpk_core::validate_params;

    use super::*;

    fn transform() -> DocIdTransform {
        let params = validate_params(&DocIdConfiguration.spec(), &BTreeMap::new()).unwrap();
        DocIdTransform::new(&params, Arc::new(IdAllocator::new(0)))
    }

    #[test]
    fn known_sha256_vectors() {
        // FIPS 180-2 test vector and the empty-string digest.
        assert_eq!(content_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_eq!(content_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn annotates_ids_and_hashes() {
        let mut t = transform();
        let (out, _) = t.transform(DocTable::from_contents(["a", "b", "a"]), "f").unwrap();
        let t0 = &out[0];
        assert_eq!(t0.int64s("int_id_column").unwrap(), [0, 1, 2]);
        let h = t0.strings("document_id").unwrap();
        assert_eq!(h[0], content_hash("a"));
        assert_eq!(h[0], h[2]);
        assert_ne!(h[0], h[1]);
    }

    #[test]
    fn missing_contents_is_an_error() {
        let table = DocTable::from_contents(["a"]).with_column("x", ColumnData::Int64(vec![1])).unwrap();
        let table = DocTable::new(vec![table.columns()[1].clone()]).unwrap();
        assert!(matches!(transform().transform(table, "f"), Err(TransformError::MissingColumn(_))));
    }

    #[test]
    fn blocks_are_disjoint() {
        let ids = IdAllocator::new(5);
        assert_eq!(ids.block(), (5, 1005));
        assert_eq!(ids.block(), (1005, 2005));
    }
}
