//! Uniform identify/read/write layer over storage backends.
//!
//! A [`DataAccessFactory`] is built once from a [`DataAccessConfig`] and hands
//! out one [`DataAccess`] instance per worker. Two backends ship: the local
//! filesystem and an in-memory blob map used by tests.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::RwLock;
use walkdir::WalkDir;

use crate::error::DataAccessError;

/// Storage backend selector.
#[derive(Clone, Debug)]
pub enum Backend {
    LocalFs,
    Memory(MemoryStore),
}

impl Backend {
    /// Resolves a backend by its configuration name. The memory backend gets
    /// a fresh empty store.
    pub fn from_name(name: &str) -> Result<Self, DataAccessError> {
        match name {
            "local" | "local_fs" => Ok(Backend::LocalFs),
            "memory" => Ok(Backend::Memory(MemoryStore::default())),
            other => Err(DataAccessError::UnknownBackend(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::LocalFs => "local_fs",
            Backend::Memory(_) => "memory",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DataAccessConfig {
    pub input_path: String,
    pub output_path: String,
    pub extensions: Vec<String>,
    pub checkpointing: bool,
    pub backend: Backend,
}

impl DataAccessConfig {
    pub fn local(input: impl Into<String>, output: impl Into<String>) -> Self {
        DataAccessConfig {
            input_path: input.into(),
            output_path: output.into(),
            extensions: vec![".parquet".to_string()],
            checkpointing: false,
            backend: Backend::LocalFs,
        }
    }

    pub fn memory(store: MemoryStore, input: impl Into<String>, output: impl Into<String>) -> Self {
        DataAccessConfig { backend: Backend::Memory(store), ..DataAccessConfig::local(input, output) }
    }

    pub fn with_extensions<S: Into<String>>(mut self, exts: impl IntoIterator<Item = S>) -> Self {
        self.extensions = exts.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_checkpointing(mut self, on: bool) -> Self {
        self.checkpointing = on;
        self
    }

    pub fn validate(&self) -> Result<(), DataAccessError> {
        if self.extensions.is_empty() {
            return Err(DataAccessError::InvalidConfig("no extensions configured".into()));
        }
        if let Some(bad) = self.extensions.iter().find(|e| !e.starts_with('.') || e.len() < 2) {
            return Err(DataAccessError::InvalidConfig(format!("extension {bad:?} must begin with '.'")));
        }
        if normalize_root(&self.input_path) == normalize_root(&self.output_path) {
            return Err(DataAccessError::SameInputOutput(self.input_path.clone()));
        }
        Ok(())
    }
}

fn normalize_root(path: &str) -> String {
    let p = Path::new(path);
    let abs = fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
    abs.to_string_lossy().trim_end_matches('/').to_string()
}

/// An input file, addressed relative to the input folder.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileRef {
    pub relative_path: String,
    pub size_bytes: u64,
}

/// Where a transform output lands, relative to the output folder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputName {
    pub relative_path: String,
    pub extension: String,
    pub split_index: Option<usize>,
}

impl OutputName {
    pub fn new(relative_path: impl Into<String>, extension: impl Into<String>) -> Self {
        OutputName { relative_path: relative_path.into(), extension: extension.into(), split_index: None }
    }

    pub fn with_split(mut self, index: usize) -> Self {
        self.split_index = Some(index);
        self
    }

    /// Mapped path under the output folder.
    pub fn render(&self) -> String {
        name_output(&self.relative_path, &self.extension, self.split_index)
    }
}

/// Maps an input-relative path to its output-relative path: keeps the
/// directory structure, swaps the extension and appends `_<k>` for split
/// outputs.
pub fn name_output(relative_path: &str, extension: &str, split_index: Option<usize>) -> String {
    let stem = strip_extension(relative_path);
    match split_index {
        Some(k) => format!("{stem}_{k}{extension}"),
        None => format!("{stem}{extension}"),
    }
}

/// Drops the final extension of the last path component, if any.
pub fn strip_extension(relative_path: &str) -> &str {
    let file_start = relative_path.rfind('/').map_or(0, |i| i + 1);
    match relative_path[file_start..].rfind('.') {
        Some(dot) if dot > 0 => &relative_path[..file_start + dot],
        _ => relative_path,
    }
}

/// Checkpoint keys an output path satisfies: its stem, plus the un-split
/// stem when the name ends in `_<digits>`.
pub fn checkpoint_keys(output_relative: &str) -> Vec<String> {
    let stem = strip_extension(output_relative);
    let mut keys = vec![stem.to_string()];
    if let Some(us) = stem.rfind('_') {
        let suffix = &stem[us + 1..];
        let file_start = stem.rfind('/').map_or(0, |i| i + 1);
        if us > file_start && !suffix.is_empty() && suffix.bytes().all(|b| b.is_ascii_digit()) {
            keys.push(stem[..us].to_string());
        }
    }
    keys
}

/// Rejects absolute paths, empty segments and parent traversal.
pub fn check_relative(path: &str) -> Result<(), DataAccessError> {
    let bad = path.is_empty()
        || path.starts_with('/')
        || path.contains('\\')
        || path.split('/').any(|seg| seg.is_empty() || seg == "." || seg == "..");
    if bad {
        Err(DataAccessError::OutsideRoot(path.to_string()))
    } else {
        Ok(())
    }
}

/// Storage operations available to a worker.
pub trait DataAccess: Send {
    fn config(&self) -> &DataAccessConfig;

    /// Every input whose name ends with a configured extension, sorted by
    /// relative path.
    fn list_input_files(&self) -> Result<Vec<FileRef>, DataAccessError>;

    /// Relative paths of every file currently under the output folder.
    fn list_output_files(&self) -> Result<Vec<String>, DataAccessError>;

    fn read_file(&self, file: &FileRef) -> Result<Vec<u8>, DataAccessError>;

    /// Writes under the output folder at `name.render()`; returns bytes written.
    fn write_output(&self, name: &OutputName, payload: &[u8]) -> Result<u64, DataAccessError> {
        self.write_output_path(&name.render(), payload)
    }

    /// Writes a file at an explicit path relative to the output folder.
    fn write_output_path(&self, relative: &str, payload: &[u8]) -> Result<u64, DataAccessError>;

    fn read_output(&self, relative: &str) -> Result<Vec<u8>, DataAccessError>;

    /// Inputs with no existing output, plain or split-indexed. Matching is
    /// by name only.
    fn unprocessed_files(&self) -> Result<Vec<FileRef>, DataAccessError> {
        let inputs = self.list_input_files()?;
        let done: HashSet<String> = self.list_output_files()?.iter().flat_map(|o| checkpoint_keys(o)).collect();
        Ok(inputs.into_iter().filter(|f| !done.contains(strip_extension(&f.relative_path))).collect())
    }

    /// Files to process in this job: all inputs, or only the unprocessed
    /// ones when checkpointing is on.
    fn files_to_process(&self) -> Result<Vec<FileRef>, DataAccessError> {
        if self.config().checkpointing {
            self.unprocessed_files()
        } else {
            self.list_input_files()
        }
    }
}

fn matches_extension(name: &str, extensions: &[String]) -> bool {
    extensions.iter().any(|e| name.ends_with(e.as_str()))
}

/// Immutable, shareable builder of per-worker [`DataAccess`] instances.
#[derive(Clone, Debug)]
pub struct DataAccessFactory {
    config: Arc<DataAccessConfig>,
}

impl DataAccessFactory {
    /// Validates the configuration and prepares the output folder.
    pub fn new(config: DataAccessConfig) -> Result<Self, DataAccessError> {
        config.validate()?;
        if let Backend::LocalFs = config.backend {
            let input = Path::new(&config.input_path);
            let meta = fs::metadata(input).map_err(|e| DataAccessError::io(&config.input_path, e))?;
            if !meta.is_dir() {
                return Err(DataAccessError::io(
                    &config.input_path,
                    io::Error::new(io::ErrorKind::NotADirectory, "input path is not a folder"),
                ));
            }
            fs::read_dir(input).map_err(|e| DataAccessError::io(&config.input_path, e))?;
            fs::create_dir_all(&config.output_path).map_err(|e| DataAccessError::io(&config.output_path, e))?;
        }
        Ok(DataAccessFactory { config: Arc::new(config) })
    }

    pub fn config(&self) -> &DataAccessConfig {
        &self.config
    }

    pub fn create(&self) -> Box<dyn DataAccess> {
        match &self.config.backend {
            Backend::LocalFs => Box::new(LocalDataAccess { config: Arc::clone(&self.config) }),
            Backend::Memory(store) => {
                Box::new(MemoryDataAccess { config: Arc::clone(&self.config), store: store.clone() })
            }
        }
    }
}

/// Builds a single [`DataAccess`] directly from configuration.
pub fn make_data_access(config: DataAccessConfig) -> Result<Box<dyn DataAccess>, DataAccessError> {
    Ok(DataAccessFactory::new(config)?.create())
}

pub struct LocalDataAccess {
    config: Arc<DataAccessConfig>,
}

impl LocalDataAccess {
    fn walk(root: &Path, filter: impl Fn(&str) -> bool) -> Result<Vec<(String, u64)>, DataAccessError> {
        if !root.exists() {
            return Ok(Vec::new());
        }
        let mut found = Vec::new();
        for entry in WalkDir::new(root).follow_links(true) {
            let entry = entry.map_err(|e| {
                let path = e.path().unwrap_or(root).to_string_lossy().into_owned();
                DataAccessError::io(&path, e.into())
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .expect("walkdir yields paths under its root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            if filter(&rel) {
                let size = entry.metadata().map_err(|e| DataAccessError::io(&rel, e.into()))?.len();
                found.push((rel, size));
            }
        }
        found.sort();
        Ok(found)
    }

    fn output_path(&self, relative: &str) -> Result<PathBuf, DataAccessError> {
        check_relative(relative)?;
        Ok(Path::new(&self.config.output_path).join(relative))
    }
}

impl DataAccess for LocalDataAccess {
    fn config(&self) -> &DataAccessConfig {
        &self.config
    }

    fn list_input_files(&self) -> Result<Vec<FileRef>, DataAccessError> {
        let exts = &self.config.extensions;
        let files = Self::walk(Path::new(&self.config.input_path), |name| matches_extension(name, exts))?;
        Ok(files.into_iter().map(|(relative_path, size_bytes)| FileRef { relative_path, size_bytes }).collect())
    }

    fn list_output_files(&self) -> Result<Vec<String>, DataAccessError> {
        let files = Self::walk(Path::new(&self.config.output_path), |_| true)?;
        Ok(files.into_iter().map(|(rel, _)| rel).collect())
    }

    fn read_file(&self, file: &FileRef) -> Result<Vec<u8>, DataAccessError> {
        check_relative(&file.relative_path)?;
        let path = Path::new(&self.config.input_path).join(&file.relative_path);
        fs::read(path).map_err(|e| DataAccessError::Read { path: file.relative_path.clone(), source: e })
    }

    fn write_output_path(&self, relative: &str, payload: &[u8]) -> Result<u64, DataAccessError> {
        let path = self.output_path(relative)?;
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| DataAccessError::io(relative, e))?;
        }
        fs::write(&path, payload).map_err(|e| DataAccessError::Write { path: relative.to_string(), source: e })?;
        Ok(payload.len() as u64)
    }

    fn read_output(&self, relative: &str) -> Result<Vec<u8>, DataAccessError> {
        let path = self.output_path(relative)?;
        fs::read(path).map_err(|e| DataAccessError::Read { path: relative.to_string(), source: e })
    }
}

/// Shared in-memory blob map, keyed by `<folder>/<relative path>`.
#[derive(Clone, Default)]
pub struct MemoryStore {
    blobs: Arc<RwLock<BTreeMap<String, Vec<u8>>>>,
}

impl fmt::Debug for MemoryStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoryStore").field("blobs", &self.blobs.read().len()).finish()
    }
}

impl MemoryStore {
    pub fn put(&self, folder: &str, relative: &str, data: impl Into<Vec<u8>>) {
        self.blobs.write().insert(join_key(folder, relative), data.into());
    }

    pub fn get(&self, folder: &str, relative: &str) -> Option<Vec<u8>> {
        self.blobs.read().get(&join_key(folder, relative)).cloned()
    }

    pub fn remove(&self, folder: &str, relative: &str) -> Option<Vec<u8>> {
        self.blobs.write().remove(&join_key(folder, relative))
    }

    /// Relative paths and sizes under a folder, sorted.
    pub fn list(&self, folder: &str) -> Vec<(String, u64)> {
        let prefix = format!("{}/", folder.trim_end_matches('/'));
        self.blobs
            .read()
            .range(prefix.clone()..)
            .take_while(|(k, _)| k.starts_with(&prefix))
            .map(|(k, v)| (k[prefix.len()..].to_string(), v.len() as u64))
            .collect()
    }
}

fn join_key(folder: &str, relative: &str) -> String {
    format!("{}/{}", folder.trim_end_matches('/'), relative)
}

pub struct MemoryDataAccess {
    config: Arc<DataAccessConfig>,
    store: MemoryStore,
}

impl DataAccess for MemoryDataAccess {
    fn config(&self) -> &DataAccessConfig {
        &self.config
    }

    fn list_input_files(&self) -> Result<Vec<FileRef>, DataAccessError> {
        Ok(self
            .store
            .list(&self.config.input_path)
            .into_iter()
            .filter(|(name, _)| matches_extension(name, &self.config.extensions))
            .map(|(relative_path, size_bytes)| FileRef { relative_path, size_bytes })
            .collect())
    }

    fn list_output_files(&self) -> Result<Vec<String>, DataAccessError> {
        Ok(self.store.list(&self.config.output_path).into_iter().map(|(name, _)| name).collect())
    }

    fn read_file(&self, file: &FileRef) -> Result<Vec<u8>, DataAccessError> {
        check_relative(&file.relative_path)?;
        self.store.get(&self.config.input_path, &file.relative_path).ok_or_else(|| DataAccessError::Read {
            path: file.relative_path.clone(),
            source: io::Error::new(io::ErrorKind::NotFound, "no such blob"),
        })
    }

    fn write_output_path(&self, relative: &str, payload: &[u8]) -> Result<u64, DataAccessError> {
        check_relative(relative)?;
        self.store.put(&self.config.output_path, relative, payload);
        Ok(payload.len() as u64)
    }

    fn read_output(&self, relative: &str) -> Result<Vec<u8>, DataAccessError> {
        check_relative(relative)?;
        self.store.get(&self.config.output_path, relative).ok_or_else(|| DataAccessError::Read {
            path: relative.to_string(),
            source: io::Error::new(io::ErrorKind::NotFound, "no such blob"),
        })
    }
}
