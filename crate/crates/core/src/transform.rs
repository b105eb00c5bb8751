//! The transform contract.
//!
//! A [`BinaryTransform`] maps one input payload to zero or more output
//! payloads, each tagged with an extension, plus numeric metadata. Stateful
//! transforms buffer across calls and emit the remainder from `flush_binary`.
//! [`TableTransform`] is the same contract over decoded [`DocTable`]s;
//! [`TableAdapter`] lifts it to the binary form by decoding and encoding
//! Parquet around each call.

use crate::error::TransformError;
use crate::stats::Statistics;
use crate::table::DocTable;

pub const PARQUET_EXT: &str = ".parquet";

#[derive(Clone, Debug, Default)]
pub struct TransformOutcome {
    pub outputs: Vec<(Vec<u8>, String)>,
    pub metadata: Statistics,
}

impl TransformOutcome {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(payload: Vec<u8>, extension: &str) -> Self {
        TransformOutcome { outputs: vec![(payload, extension.to_string())], metadata: Statistics::new() }
    }

    pub fn with_metadata(mut self, metadata: Statistics) -> Self {
        self.metadata = metadata;
        self
    }

    /// Checks extension and metadata constraints.
    pub fn check(&self) -> Result<(), TransformError> {
        if let Some((_, ext)) = self.outputs.iter().find(|(_, e)| !e.starts_with('.')) {
            return Err(TransformError::failed(format!("output extension {ext:?} must begin with '.'")));
        }
        if let Some((k, v)) = self.metadata.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(TransformError::failed(format!("metadata {k} = {v} is not a non-negative number")));
        }
        Ok(())
    }
}

pub trait BinaryTransform: Send {
    fn transform_binary(&mut self, file_name: &str, data: &[u8]) -> Result<TransformOutcome, TransformError>;

    fn flush_binary(&mut self) -> Result<TransformOutcome, TransformError> {
        Ok(TransformOutcome::empty())
    }
}

/// Tables out plus metadata, the result unit of a [`TableTransform`] call.
pub type TableOutcome = (Vec<DocTable>, Statistics);

pub trait TableTransform: Send {
    fn transform(&mut self, table: DocTable, file_name: &str) -> Result<TableOutcome, TransformError>;

    fn flush(&mut self) -> Result<TableOutcome, TransformError> {
        Ok((Vec::new(), Statistics::new()))
    }
}

/// Enforces call order: no transform after flush, flush at most once.
pub struct FlushGuard<T> {
    inner: T,
    flushed: bool,
}

impl<T> FlushGuard<T> {
    pub fn new(inner: T) -> Self {
        FlushGuard { inner, flushed: false }
    }

    pub fn into_inner(self) -> T {
        self.inner
    }
}

impl<T: BinaryTransform> BinaryTransform for FlushGuard<T> {
    fn transform_binary(&mut self, file_name: &str, data: &[u8]) -> Result<TransformOutcome, TransformError> {
        if self.flushed {
            return Err(TransformError::AfterFlush);
        }
        let out = self.inner.transform_binary(file_name, data)?;
        out.check()?;
        Ok(out)
    }

    fn flush_binary(&mut self) -> Result<TransformOutcome, TransformError> {
        if self.flushed {
            return Err(TransformError::DoubleFlush);
        }
        self.flushed = true;
        let out = self.inner.flush_binary()?;
        out.check()?;
        Ok(out)
    }
}

impl BinaryTransform for Box<dyn BinaryTransform> {
    fn transform_binary(&mut self, file_name: &str, data: &[u8]) -> Result<TransformOutcome, TransformError> {
        (**self).transform_binary(file_name, data)
    }

    fn flush_binary(&mut self) -> Result<TransformOutcome, TransformError> {
        (**self).flush_binary()
    }
}

/// Runs a [`TableTransform`] over Parquet payloads.
pub struct TableAdapter<T> {
    inner: T,
    flushed: bool,
}

impl<T: TableTransform> TableAdapter<T> {
    pub fn new(inner: T) -> Self {
        TableAdapter { inner, flushed: false }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    fn encode((tables, metadata): TableOutcome) -> Result<TransformOutcome, TransformError> {
        let outputs = tables
            .iter()
            .map(|t| Ok((t.to_parquet()?, PARQUET_EXT.to_string())))
            .collect::<Result<Vec<_>, TransformError>>()?;
        Ok(TransformOutcome { outputs, metadata })
    }
}

impl<T: TableTransform> BinaryTransform for TableAdapter<T> {
    fn transform_binary(&mut self, file_name: &str, data: &[u8]) -> Result<TransformOutcome, TransformError> {
        if self.flushed {
            return Err(TransformError::AfterFlush);
        }
        let table = DocTable::from_parquet(data)?;
        Self::encode(self.inner.transform(table, file_name)?)
    }

    fn flush_binary(&mut self) -> Result<TransformOutcome, TransformError> {
        if self.flushed {
            return Err(TransformError::DoubleFlush);
        }
        self.flushed = true;
        Self::encode(self.inner.flush()?)
    }
}
