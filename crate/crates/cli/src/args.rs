//! Flag parsing for `run`: common flags plus `--<transform>_<param>` flags.

use std::collections::{BTreeMap, BTreeSet};

use dpk_core::params::nearest;
use dpk_core::{ConfigError, DataAccessConfig, JobSpec, OnError, Registry, RuntimeError};

pub const COMMON_FLAGS: [&str; 7] =
    ["input_folder", "output_folder", "extensions", "checkpointing", "num_workers", "seed", "on_error"];

/// `--key value` and `--key=value` pairs, in order. A repeated key keeps the last value.
pub fn parse_flag_args<S: AsRef<str>>(args: &[S]) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut it = args.iter().map(AsRef::as_ref).peekable();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            return Err(ConfigError::invalid(arg, "expected a --flag"));
        };
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| ConfigError::invalid(body, "missing value"))?;
                (body.to_string(), v.to_string())
            }
        };
        if key.is_empty() {
            return Err(ConfigError::invalid(arg, "empty flag name"));
        }
        out.insert(key, value);
    }
    Ok(out)
}

fn parse_bool(flag: &str, v: &str) -> Result<bool, ConfigError> {
    v.parse().map_err(|_| ConfigError::TypeMismatch { flag: flag.into(), value: v.into(), expected: "bool" })
}

/// Builds a local-filesystem job from flat flags.
pub fn job_from_flags(
    registry: &Registry,
    transform: &str,
    flags: &BTreeMap<String, String>,
) -> Result<JobSpec, RuntimeError> {
    let spec = registry.get(transform)?.spec();
    let transform_flags: BTreeSet<String> = spec.flags().into_iter().collect();
    let valid: Vec<String> =
        COMMON_FLAGS.iter().map(|s| s.to_string()).chain(transform_flags.iter().cloned()).collect();
    for key in flags.keys() {
        if !valid.contains(key) {
            return Err(ConfigError::UnknownFlag {
                flag: key.clone(),
                suggestion: nearest(key, valid.iter().map(String::as_str)),
            }
            .into());
        }
    }
    let required = |k: &str| flags.get(k).cloned().ok_or_else(|| ConfigError::Missing(k.to_string()));
    let mut data = DataAccessConfig::local(required("input_folder")?, required("output_folder")?);
    if let Some(ext) = flags.get("extensions") {
        data = data.with_extensions(ext.split(',').map(str::trim).filter(|e| !e.is_empty()));
    }
    if let Some(c) = flags.get("checkpointing") {
        data = data.with_checkpointing(parse_bool("checkpointing", c)?);
    }
    let mut job = JobSpec::new(transform, data);
    if let Some(n) = flags.get("num_workers") {
        job.runtime.num_workers = n.parse().map_err(|_| ConfigError::TypeMismatch {
            flag: "num_workers".into(),
            value: n.clone(),
            expected: "positive integer",
        })?;
    }
    if let Some(s) = flags.get("seed") {
        job.runtime.seed = s.parse().map_err(|_| ConfigError::TypeMismatch {
            flag: "seed".into(),
            value: s.clone(),
            expected: "unsigned integer",
        })?;
    }
    if let Some(e) = flags.get("on_error") {
        job.runtime.on_error = e.parse::<OnError>().map_err(|m| ConfigError::invalid("on_error", m))?;
    }
    let prefix = format!("{}_", spec.name);
    for (k, v) in flags {
        if transform_flags.contains(k) {
            job.params.insert(k[prefix.len()..].to_string(), v.clone());
        }
    }
    Ok(job)
}

/// True for errors caused by the request rather than by running the job.
pub fn is_validation_error(e: &RuntimeError) -> bool {
    use dpk_core::DataAccessError as D;
    match e {
        RuntimeError::InvalidConfig(_) | RuntimeError::UnknownTransform { .. } | RuntimeError::Config(_) => true,
        RuntimeError::DataAccess(d) => {
            matches!(d, D::InvalidConfig(_) | D::SameInputOutput(_) | D::UnknownBackend(_))
        }
        _ => false,
    }
}
