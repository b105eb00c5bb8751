use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dpk_core::{Registry, TransformConfigSpec};
use serde::Serialize;

use crate::args::{job_from_flags, parse_flag_args, COMMON_FLAGS};
use crate::bench::{run_bench, BenchConfig};
use crate::generate::{generate_corpus, CorpusSpec};
use crate::pipeline::{parse_spec, run_pipeline};
use crate::{CliError, EXIT_INVALID, EXIT_OK};

#[derive(Parser, Debug)]
#[command(name = "dpk", version, about = "Document preparation transforms over Parquet folders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one transform: `dpk run <transform> --input_folder in --output_folder out [--<transform>_<param> v]...`
    /// `dpk run <transform> --help` lists the transform's flags.
    #[command(disable_help_flag = true)]
    Run {
        transform: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        flags: Vec<String>,
    },
    /// Run a JSON pipeline spec step by step.
    Pipeline {
        spec: PathBuf,
        /// Rerun from this step, reusing the outputs of earlier steps.
        #[arg(long = "from_step", default_value_t = 0)]
        from_step: usize,
    },
    /// Write a seeded synthetic corpus with planted duplicates and truth.json.
    Generate {
        #[arg(long)]
        output: PathBuf,
        #[arg(long = "n_files", default_value_t = 10)]
        n_files: usize,
        #[arg(long = "rows_per_file", default_value_t = 100)]
        rows_per_file: usize,
        #[arg(long = "dup_fraction", default_value_t = 0.0)]
        dup_fraction: f64,
        #[arg(long = "near_dup_fraction", default_value_t = 0.0)]
        near_dup_fraction: f64,
        #[arg(long = "near_dup_jaccard", default_value_t = 0.9)]
        near_dup_jaccard: f64,
        #[arg(long = "min_words", default_value_t = 50)]
        min_words: usize,
        #[arg(long = "max_words", default_value_t = 150)]
        max_words: usize,
        #[arg(long, default_value_t = 20_000)]
        vocabulary: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Time transforms over a corpus and append results to a JSON file.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated transform names.
        #[arg(long, value_delimiter = ',', required = true)]
        transforms: Vec<String>,
        /// Comma-separated worker counts.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value = "bench.json")]
        output: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Transform flag override, e.g. `--param noop_sleep_s=0.05`. Repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// List transforms and their flags.
    List,
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) {
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn describe(spec: &TransformConfigSpec) -> String {
    let mut s = format!("{}\n", spec.name);
    for p in &spec.params {
        let default = match (&p.default, p.required) {
            (_, true) => " (required)".to_string(),
            (Some(d), _) => format!(" (default {d})"),
            (None, _) => String::new(),
        };
        s.push_str(&format!("  --{}{default}: {}\n", spec.flag(&p.name), p.help));
    }
    s
}

/// `transform_flag=value` overrides grouped by transform, unprefixed.
fn bench_params(registry: &Registry, raw: &[String]) -> Result<BTreeMap<String, BTreeMap<String, String>>, CliError> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for item in raw {
        let (flag, value) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("--param expects flag=value, got {item:?}")))?;
        let owner = registry
            .names()
            .into_iter()
            .filter(|n| flag.starts_with(&format!("{n}_")))
            .max_by_key(String::len)
            .ok_or_else(|| CliError::Usage(format!("--param {flag}: no transform owns this flag")))?;
        out.entry(owner.clone()).or_default().insert(flag[owner.len() + 1..].to_string(), value.to_string());
    }
    Ok(out)
}

fn dispatch(cli: Cli, registry: &Registry, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Run { transform, flags } => {
            if flags.iter().any(|f| f == "--help" || f == "-h") {
                let spec = registry.get(&transform)?.spec();
                let _ =
                    writeln!(out, "{}common: {}", describe(&spec), COMMON_FLAGS.map(|f| format!("--{f}")).join(" "));
                return Ok(());
            }
            let flags = parse_flag_args(&flags).map_err(dpk_core::RuntimeError::from)?;
            let job = job_from_flags(registry, &transform, &flags)?;
            emit(out, &registry.launch(&job)?);
        }
        Command::Pipeline { spec, from_step } => {
            let text = fs::read_to_string(&spec).map_err(|e| CliError::io(&spec, e))?;
            emit(out, &run_pipeline(&parse_spec(&text)?, registry, from_step)?);
        }
        Command::Generate {
            output,
            n_files,
            rows_per_file,
            dup_fraction,
            near_dup_fraction,
            near_dup_jaccard,
            min_words,
            max_words,
            vocabulary,
            seed,
        } => {
            let spec = CorpusSpec {
                n_files,
                rows_per_file,
                dup_fraction,
                near_dup_fraction,
                near_dup_jaccard,
                min_words,
                max_words,
                vocabulary,
                seed,
            };
            let truth = generate_corpus(&spec, &output)?;
            emit(
                out,
                &serde_json::json!({
                    "output": output,
                    "files": n_files,
                    "rows": spec.total_rows(),
                    "exact_groups": truth.exact_groups.len(),
                    "exact_rows": truth.covered_exact_rows(),
                    "near_groups": truth.near_groups.len(),
                }),
            );
        }
        Command::Bench { corpus, transforms, workers, repeats, output, csv, params } => {
            let cfg = BenchConfig {
                params: bench_params(registry, &params)?,
                corpus,
                transforms,
                workers,
                repeats,
                output,
                csv,
            };
            emit(out, &run_bench(&cfg, registry)?);
        }
        Command::List => {
            for name in registry.names() {
                let _ = write!(out, "{}", describe(&registry.get(&name)?.spec()));
            }
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    let registry = dpk_transforms::registry();
    match dispatch(cli, &registry, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
