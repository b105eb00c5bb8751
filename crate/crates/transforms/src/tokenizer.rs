//! Token counting behind a pluggable [`Tokenizer`].

use std::sync::Arc;

use dpk_core::{
    ColumnData, DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableOutcome, TableTransform,
    TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};

use crate::{content_column_param, PerWorker};

pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// Characters trimmed from both ends of each whitespace piece.
pub const PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?', '"', '\'', '(', ')', '[', ']', '{', '}'];

/// Whitespace split, edge punctuation stripped, empties dropped.
#[derive(Clone, Copy, Debug, Default)]
pub struct RuleTokenizer;

impl RuleTokenizer {
    pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
        text.split_whitespace().map(|p| p.trim_matches(PUNCTUATION)).filter(|t| !t.is_empty())
    }
}

impl Tokenizer for RuleTokenizer {
    fn name(&self) -> &str {
        "rule"
    }

    fn count(&self, text: &str) -> usize {
        Self::tokens(text).count()
    }
}

pub fn tokenizer_by_name(name: &str) -> Option<Arc<dyn Tokenizer>> {
    match name {
        "rule" => Some(Arc::new(RuleTokenizer)),
        _ => None,
    }
}

pub struct TokenCountTransform {
    content_column: String,
    output_column: String,
    tokenizer: Arc<dyn Tokenizer>,
}

impl TokenCountTransform {
    pub fn new(content_column: &str, output_column: &str, tokenizer: Arc<dyn Tokenizer>) -> Self {
        TokenCountTransform { content_column: content_column.into(), output_column: output_column.into(), tokenizer }
    }
}

impl TableTransform for TokenCountTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let texts = table
            .strings(&self.content_column)
            .map_err(|_| TransformError::MissingColumn(self.content_column.clone()))?;
        let counts: Vec<i64> = texts.iter().map(|t| self.tokenizer.count(t) as i64).collect();
        let mut meta = Statistics::new();
        meta.add("nrows", table.num_rows() as f64);
        meta.add("tokens", counts.iter().sum::<i64>() as f64);
        let table = table.with_column(&self.output_column, ColumnData::Int64(counts))?;
        Ok((vec![table], meta))
    }
}

pub struct TokenizerConfiguration;

impl TransformConfiguration for TokenizerConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("tokenizer")
            .param(content_column_param())
            .param(ParamDef::optional(
                "output_column",
                ParamValue::Str("token_count".into()),
                "column receiving the token count",
            ))
            .param(ParamDef::optional("tokenizer", ParamValue::Str("rule".into()), "tokenizer implementation"))
            .validator(|p| {
                if tokenizer_by_name(p.str("tokenizer")).is_none() {
                    return Err(p.invalid("tokenizer", "unknown tokenizer; available: rule"));
                }
                if p.str("output_column").is_empty() {
                    return Err(p.invalid("output_column", "must be non-empty"));
                }
                Ok(())
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let tok = tokenizer_by_name(params.str("tokenizer"))
            .ok_or_else(|| TransformError::InvalidInput("unknown tokenizer".into()))?;
        let (content, output) = (params.str("content_column").to_string(), params.str("output_column").to_string());
        Ok(Box::new(PerWorker(move |_| TokenCountTransform::new(&content, &output, Arc::clone(&tok)))))
    }
}
