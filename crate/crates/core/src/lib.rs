//! Core runtime for document-table data preparation.
//!
//! - [`data_access`]: listing, reading and writing files on a storage backend,
//!   with name-based checkpointing.
//! - [`table`]: the columnar [`DocTable`] and its Parquet encoding.
//! - [`transform`]: the binary and table transform contract.
//! - [`params`]: transform parameter declaration and validation.
//! - [`runtime`]: the local worker-pool launcher and orchestrator.

pub mod data_access;
pub mod error;
pub mod params;
pub mod runtime;
pub mod stats;
pub mod table;
pub mod transform;

pub use data_access::{
    make_data_access, name_output, Backend, DataAccess, DataAccessConfig, DataAccessFactory, FileRef, MemoryStore,
    OutputName,
};
pub use error::{ConfigError, DataAccessError, RuntimeError, TableError, TransformError};
pub use params::{validate_params, ParamDef, ParamType, ParamValue, Params, TransformConfigSpec};
pub use runtime::{
    launch_with, orchestrate, Artifacts, JobContext, JobReport, JobSpec, LocalRuntime, OnError, Registry, Runtime,
    RuntimeConfig, TransformConfiguration, TransformJob, METADATA_FILE,
};
pub use stats::{merge_statistics, Statistics};
pub use table::{Column, ColumnData, ColumnType, DocTable, Value, CONTENTS};
pub use transform::{
    BinaryTransform, FlushGuard, TableAdapter, TableOutcome, TableTransform, TransformOutcome, PARQUET_EXT,
};
