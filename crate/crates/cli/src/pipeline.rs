//! Sequential local pipelines.
//!
//! A spec is JSON:
//!
//! ```json
//! {"workdir": "work", "input": "corpus",
//!  "steps": [{"transform": "doc_id"},
//!            {"transform": "filter", "params": {"filter_expr": "true", "num_workers": "2"}}]}
//! ```
//!
//! Step `k` writes to `<workdir>/<k>_<transform>/` and reads the previous
//! step's output, unless the step sets `input` or `output`. Step params use
//! the same names as `run` flags; a transform param may also be given
//! without its prefix. A default step folder is emptied before the step runs
//! unless checkpointing is on.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dpk_core::{JobReport, JobSpec, Registry, Statistics, METADATA_FILE};
use serde::{Deserialize, Serialize};

use crate::args::{job_from_flags, COMMON_FLAGS};
use crate::CliError;

pub const REPORT_FILE: &str = "pipeline_report.json";

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub workdir: String,
    #[serde(default)]
    pub input: Option<String>,
    pub steps: Vec<StepSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub transform: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub name: String,
    pub output: String,
    pub duration_s: f64,
    pub stats: Statistics,
    /// True when the step was not rerun and its report was read back.
    #[serde(default)]
    pub reused: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub steps: Vec<StepReport>,
    pub total_duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Parses a spec, naming the offending line on error.
pub fn parse_spec(text: &str) -> Result<PipelineSpec, CliError> {
    let spec: PipelineSpec = serde_json::from_str(text).map_err(|e| {
        let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("");
        CliError::Spec(format!("{e}\n  {}: {line}", e.line()))
    })?;
    if spec.steps.is_empty() {
        return Err(CliError::Spec("no steps".into()));
    }
    Ok(spec)
}

fn flag_value(v: &serde_json::Value) -> Result<String, CliError> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        other => Err(CliError::Spec(format!("param values must be scalars, got {other}"))),
    }
}

struct Planned {
    job: JobSpec,
    default_output: bool,
}

impl PipelineSpec {
    pub fn step_dir(&self, index: usize) -> PathBuf {
        Path::new(&self.workdir).join(format!("{index}_{}", self.steps[index].transform))
    }

    fn output_of(&self, index: usize) -> String {
        match &self.steps[index].output {
            Some(o) => o.clone(),
            None => self.step_dir(index).to_string_lossy().into_owned(),
        }
    }

    /// Every step as a validated job, before anything runs.
    fn plan(&self, registry: &Registry) -> Result<Vec<Planned>, CliError> {
        let mut out = Vec::new();
        for (i, step) in self.steps.iter().enumerate() {
            let spec = registry.get(&step.transform)?.spec();
            let valid = spec.flags();
            let mut flags = BTreeMap::new();
            for (k, v) in &step.params {
                if k == "input_folder" || k == "output_folder" {
                    return Err(CliError::Spec(format!("step {i}: use the step's input/output fields instead of {k}")));
                }
                let prefixed = format!("{}_{k}", spec.name);
                let key = if !COMMON_FLAGS.contains(&k.as_str()) && !valid.contains(k) && valid.contains(&prefixed) {
                    prefixed
                } else {
                    k.clone()
                };
                flags.insert(key, flag_value(v)?);
            }
            let input = match (&step.input, i) {
                (Some(p), _) => p.clone(),
                (None, 0) => self
                    .input
                    .clone()
                    .ok_or_else(|| CliError::Spec("the first step needs an input (top-level or per step)".into()))?,
                (None, _) => self.output_of(i - 1),
            };
            flags.insert("input_folder".into(), input);
            flags.insert("output_folder".into(), self.output_of(i));
            let job = job_from_flags(registry, &step.transform, &flags)?;
            dpk_core::validate_params(&spec, &job.params).map_err(dpk_core::RuntimeError::from)?;
            out.push(Planned { job, default_output: step.output.is_none() });
        }
        Ok(out)
    }
}

fn read_report(dir: &str) -> Option<JobReport> {
    serde_json::from_slice(&fs::read(Path::new(dir).join(METADATA_FILE)).ok()?).ok()
}

fn write_report(workdir: &Path, report: &PipelineReport) -> Result<(), CliError> {
    fs::create_dir_all(workdir).map_err(|e| CliError::io(workdir, e))?;
    let path = workdir.join(REPORT_FILE);
    let json = serde_json::to_vec_pretty(report).map_err(|e| CliError::Spec(e.to_string()))?;
    fs::write(&path, json).map_err(|e| CliError::io(&path, e))
}

/// Runs steps `from_step..`, reusing the recorded reports of earlier steps.
pub fn run_pipeline(spec: &PipelineSpec, registry: &Registry, from_step: usize) -> Result<PipelineReport, CliError> {
    if from_step >= spec.steps.len() {
        return Err(CliError::Usage(format!(
            "--from_step {from_step} but the pipeline has {} steps",
            spec.steps.len()
        )));
    }
    let plan = spec.plan(registry)?;
    let workdir = PathBuf::from(&spec.workdir);
    let clock = Instant::now();
    let mut report = PipelineReport { steps: Vec::new(), total_duration_s: 0.0, failed_step: None, error: None };

    for (i, p) in plan.iter().enumerate().take(from_step) {
        let out = &p.job.data.output_path;
        let job = read_report(out).ok_or_else(|| {
            CliError::Usage(format!("step {i} has no {METADATA_FILE} under {out}; rerun from an earlier step"))
        })?;
        report.steps.push(StepReport {
            index: i,
            name: spec.steps[i].transform.clone(),
            output: out.clone(),
            duration_s: job.job.duration_s,
            stats: job.stats,
            reused: true,
        });
    }

    for (i, p) in plan.iter().enumerate().skip(from_step) {
        let out = PathBuf::from(&p.job.data.output_path);
        if p.default_output && !p.job.data.checkpointing && out.exists() {
            fs::remove_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
        }
        let started = Instant::now();
        match registry.launch(&p.job) {
            Ok(job) => report.steps.push(StepReport {
                index: i,
                name: spec.steps[i].transform.clone(),
                output: p.job.data.output_path.clone(),
                duration_s: started.elapsed().as_secs_f64(),
                stats: job.stats,
                reused: false,
            }),
            Err(source) => {
                report.failed_step = Some(i);
                report.error = Some(source.to_string());
                report.total_duration_s = clock.elapsed().as_secs_f64();
                write_report(&workdir, &report)?;
                return Err(CliError::Step { index: i, transform: spec.steps[i].transform.clone(), source });
            }
        }
    }
    report.total_duration_s = clock.elapsed().as_secs_f64();
    write_report(&workdir, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_line() {
        let err = parse_spec("{\n  \"workdir\": \"w\",\n  \"steps\": [oops]\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("3: ") && msg.contains("oops"), "{msg}");
        assert!(parse_spec(r#"{"workdir": "w", "steps": []}"#).is_err());
        assert!(parse_spec(r#"{"workdir": "w", "steps": [{"transform": "noop", "extra": 1}]}"#).is_err());
    }

    #[test]
    fn plan_chains_folders_and_accepts_both_param_styles() {
        let spec = parse_spec(
            r#"{"workdir": "w", "input": "in", "steps": [
                {"transform": "doc_id", "params": {"id_start": 5}},
                {"transform": "filter", "params": {"filter_expr": "true", "num_workers": 2}},
                {"transform": "noop", "input": "elsewhere", "output": "final"}]}"#,
        )
        .unwrap();
        let plan = spec.plan(&dpk_transforms::registry()).unwrap();
        assert_eq!(plan[0].job.data.input_path, "in");
        assert_eq!(plan[0].job.params["id_start"], "5");
        assert_eq!(plan[1].job.data.input_path, Path::new("w").join("0_doc_id").to_string_lossy());
        assert_eq!(plan[1].job.runtime.num_workers, 2);
        assert_eq!(plan[2].job.data.input_path, "elsewhere");
        assert_eq!(plan[2].job.data.output_path, "final");
        assert!(!plan[2].default_output);
    }

    #[test]
    fn invalid_steps_fail_before_running() {
        let reg = dpk_transforms::registry();
        for bad in [
            r#"{"workdir": "w", "input": "in", "steps": [{"transform": "nosuch"}]}"#,
            r#"{"workdir": "w", "input": "in", "steps": [{"transform": "filter"}]}"#,
            r#"{"workdir": "w", "steps": [{"transform": "noop"}]}"#,
            r#"{"workdir": "w", "input": "in", "steps": [{"transform": "noop", "params": {"input_folder": "x"}}]}"#,
        ] {
            let spec = parse_spec(bad).unwrap();
            assert!(spec.plan(&reg).is_err(), "{bad}");
        }
    }
}
