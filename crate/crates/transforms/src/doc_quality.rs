//! Document quality metrics in the style of the Gopher heuristics.

use dpk_core::{
    ColumnData, DocTable, JobContext, Params, Statistics, TableOutcome, TableTransform, TransformConfigSpec,
    TransformConfiguration, TransformError, TransformJob,
};

use crate::{content_column_param, PerWorker};

pub const COMMON_WORDS: [&str; 8] = ["the", "be", "to", "of", "and", "that", "have", "with"];
const BULLETS: [char; 3] = ['-', '*', '•'];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DocQualityMetrics {
    pub total_words: i64,
    pub mean_word_len: f64,
    pub symbol_to_word_ratio: f64,
    pub bullet_line_ratio: f64,
    pub ellipsis_line_ratio: f64,
    pub alpha_word_ratio: f64,
    pub common_word_hits: i64,
}

impl DocQualityMetrics {
    pub const COLUMNS: [&'static str; 7] = [
        "docq_total_words",
        "docq_mean_word_len",
        "docq_symbol_to_word_ratio",
        "docq_bullet_line_ratio",
        "docq_ellipsis_line_ratio",
        "docq_alpha_word_ratio",
        "docq_common_word_hits",
    ];

    pub fn of(text: &str) -> Self {
        if text.is_empty() {
            return Self::default();
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        let n = words.len();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };

        let chars: usize = words.iter().map(|w| w.chars().count()).sum();
        let symbols = text.matches('#').count() + text.matches("...").count() + text.matches('…').count();
        let lines: Vec<&str> = text.split('\n').collect();
        let bullets =
            lines.iter().filter(|l| l.trim_start().chars().next().is_some_and(|c| BULLETS.contains(&c))).count();
        let ellipses = lines
            .iter()
            .filter(|l| {
                let t = l.trim_end();
                t.ends_with("...") || t.ends_with('…')
            })
            .count();
        let alpha = words.iter().filter(|w| w.chars().any(char::is_alphabetic)).count();
        let hits = COMMON_WORDS.iter().filter(|c| words.iter().any(|w| w.to_lowercase() == **c)).count();

        DocQualityMetrics {
            total_words: n as i64,
            mean_word_len: ratio(chars, n),
            symbol_to_word_ratio: (symbols as f64 / n.max(1) as f64).min(1.0),
            bullet_line_ratio: ratio(bullets, lines.len()),
            ellipsis_line_ratio: ratio(ellipses, lines.len()),
            alpha_word_ratio: ratio(alpha, n),
            common_word_hits: hits as i64,
        }
    }
}

pub struct DocQualityTransform {
    content_column: String,
}

impl DocQualityTransform {
    pub fn new(content_column: &str) -> Self {
        DocQualityTransform { content_column: content_column.into() }
    }
}

impl TableTransform for DocQualityTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let texts = table
            .strings(&self.content_column)
            .map_err(|_| TransformError::MissingColumn(self.content_column.clone()))?;
        let m: Vec<DocQualityMetrics> = texts.iter().map(|t| DocQualityMetrics::of(t)).collect();
        let floats = |f: fn(&DocQualityMetrics) -> f64| ColumnData::Float64(m.iter().map(f).collect());
        let ints = |f: fn(&DocQualityMetrics) -> i64| ColumnData::Int64(m.iter().map(f).collect());
        let [c0, c1, c2, c3, c4, c5, c6] = DocQualityMetrics::COLUMNS;
        let rows = table.num_rows();
        let table = table
            .with_column(c0, ints(|m| m.total_words))?
            .with_column(c1, floats(|m| m.mean_word_len))?
            .with_column(c2, floats(|m| m.symbol_to_word_ratio))?
            .with_column(c3, floats(|m| m.bullet_line_ratio))?
            .with_column(c4, floats(|m| m.ellipsis_line_ratio))?
            .with_column(c5, floats(|m| m.alpha_word_ratio))?
            .with_column(c6, ints(|m| m.common_word_hits))?;
        let mut meta = Statistics::new();
        meta.add("nrows", rows as f64);
        Ok((vec![table], meta))
    }
}

pub struct DocQualityConfiguration;

impl TransformConfiguration for DocQualityConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("doc_quality").param(content_column_param())
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let column = params.str("content_column").to_string();
        Ok(Box::new(PerWorker(move |_| DocQualityTransform::new(&column))))
    }
}
