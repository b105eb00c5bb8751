//! Transform catalog.
//!
//! Universal transforms: `hello`, `noop`, `doc_id`, `ededup`, `fdedup`,
//! `filter`, `resize`, `profiler`, `tokenizer`. Language transforms:
//! `doc_quality`, `lang_id`. Every transform reads and writes Parquet
//! document tables whose text lives in the `contents` column unless
//! `--<name>_content_column` says otherwise.

use dpk_core::{
    BinaryTransform, ParamDef, ParamValue, Registry, TableAdapter, TableTransform, TransformError, TransformJob,
    CONTENTS,
};

pub mod doc_id;
pub mod doc_quality;
pub mod ededup;
pub mod fdedup;
pub mod filter;
pub mod hello;
pub mod lang_id;
pub mod noop;
pub mod profiler;
pub mod resize;
pub mod tokenizer;

/// Every shipped transform, by name.
pub fn registry() -> Registry {
    let mut r = Registry::new();
    r.register(hello::HelloConfiguration)
        .register(noop::NoopConfiguration)
        .register(doc_id::DocIdConfiguration)
        .register(ededup::EdedupConfiguration)
        .register(fdedup::FdedupConfiguration)
        .register(filter::FilterConfiguration)
        .register(resize::ResizeConfiguration)
        .register(profiler::ProfilerConfiguration)
        .register(tokenizer::TokenizerConfiguration)
        .register(doc_quality::DocQualityConfiguration)
        .register(lang_id::LangIdConfiguration);
    r
}

pub(crate) fn content_column_param() -> ParamDef {
    ParamDef::optional("content_column", ParamValue::Str(CONTENTS.to_string()), "name of the text column")
}

/// Single-pass job that builds an independent table transform per worker.
pub(crate) struct PerWorker<F>(pub F);

impl<F, T> TransformJob for PerWorker<F>
where
    F: Fn(usize) -> T + Send + Sync,
    T: TableTransform + 'static,
{
    fn create_worker(&self, _pass: usize, worker: usize) -> Result<Box<dyn BinaryTransform>, TransformError> {
        Ok(Box::new(TableAdapter::new((self.0)(worker))))
    }
}
