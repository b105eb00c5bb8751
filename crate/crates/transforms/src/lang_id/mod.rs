//! Language identification by rank-order character n-gram profiles.
//!
//! A profile is the 300 most frequent character 1- to 3-grams of a text,
//! ranked by count descending with ties broken lexicographically. Text is
//! lowercased, non-alphabetic characters become separators, and each word
//! is padded with one space on each side before n-grams are taken.
//!
//! The distance from a document profile to a language profile sums, over
//! the document's n-grams, the absolute rank difference, or 300 when the
//! language lacks the n-gram. A document profile shorter than 300 is
//! charged 300 per missing entry, so every distance lies in
//! `[0, 300 * 300]` and `lang_score = 1 - d / (300 * 300)`. Built-in
//! profiles: de, en, es, fr.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use dpk_core::{
    ColumnData, DocTable, JobContext, ParamDef, ParamValue, Params, Statistics, TableOutcome, TableTransform,
    TransformConfigSpec, TransformConfiguration, TransformError, TransformJob,
};

use crate::{content_column_param, PerWorker};

pub const PROFILE_LEN: usize = 300;
pub const MAX_NGRAM: usize = 3;
pub const MAX_DISTANCE: u64 = (PROFILE_LEN * PROFILE_LEN) as u64;

const SEEDS: [(&str, &str); 4] = [
    ("de", include_str!("seeds/de.txt")),
    ("en", include_str!("seeds/en.txt")),
    ("es", include_str!("seeds/es.txt")),
    ("fr", include_str!("seeds/fr.txt")),
];

/// N-grams of `text`, most frequent first, at most [`PROFILE_LEN`].
pub fn ranked_ngrams(text: &str) -> Vec<String> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    let lower = text.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphabetic()).filter(|w| !w.is_empty()) {
        let padded: Vec<char> = std::iter::once(' ').chain(word.chars()).chain(std::iter::once(' ')).collect();
        for n in 1..=MAX_NGRAM {
            for g in padded.windows(n) {
                if n == 1 && g[0] == ' ' {
                    continue;
                }
                *counts.entry(g.iter().collect()).or_insert(0) += 1;
            }
        }
    }
    let mut all: Vec<(String, u64)> = counts.into_iter().collect();
    all.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(PROFILE_LEN);
    all.into_iter().map(|(g, _)| g).collect()
}

#[derive(Clone, Debug)]
pub struct LangProfile {
    code: String,
    ranks: HashMap<String, usize>,
}

impl LangProfile {
    pub fn from_text(code: &str, text: &str) -> Self {
        let ranks = ranked_ngrams(text).into_iter().enumerate().map(|(i, g)| (g, i)).collect();
        LangProfile { code: code.to_string(), ranks }
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn distance(&self, doc: &[String]) -> u64 {
        let present: u64 = doc
            .iter()
            .enumerate()
            .map(|(i, g)| match self.ranks.get(g) {
                Some(&j) => i.abs_diff(j) as u64,
                None => PROFILE_LEN as u64,
            })
            .sum();
        present + (PROFILE_LEN.saturating_sub(doc.len()) * PROFILE_LEN) as u64
    }
}

/// Built-in profiles sorted by language code.
pub fn builtin_profiles() -> Arc<Vec<LangProfile>> {
    static PROFILES: OnceLock<Arc<Vec<LangProfile>>> = OnceLock::new();
    Arc::clone(PROFILES.get_or_init(|| Arc::new(SEEDS.iter().map(|(c, t)| LangProfile::from_text(c, t)).collect())))
}

#[derive(Clone)]
pub struct LangIdentifier {
    profiles: Arc<Vec<LangProfile>>,
}

impl LangIdentifier {
    pub fn new(mut profiles: Vec<LangProfile>) -> Result<Self, TransformError> {
        if profiles.is_empty() {
            return Err(TransformError::InvalidInput("lang_id needs at least one profile".into()));
        }
        profiles.sort_by(|a, b| a.code.cmp(&b.code));
        Ok(LangIdentifier { profiles: Arc::new(profiles) })
    }

    pub fn builtin() -> Self {
        LangIdentifier { profiles: builtin_profiles() }
    }

    /// Closest language and its score; ties go to the smaller code.
    pub fn identify(&self, text: &str) -> (&str, f64) {
        let doc = ranked_ngrams(text);
        let mut best = (&self.profiles[0], u64::MAX);
        for p in self.profiles.iter() {
            let d = p.distance(&doc);
            if d < best.1 {
                best = (p, d);
            }
        }
        (best.0.code(), 1.0 - best.1 as f64 / MAX_DISTANCE as f64)
    }
}

pub struct LangIdTransform {
    content_column: String,
    lang_column: String,
    score_column: String,
    identifier: LangIdentifier,
}

impl TableTransform for LangIdTransform {
    fn transform(&mut self, table: DocTable, _file_name: &str) -> Result<TableOutcome, TransformError> {
        let texts = table
            .strings(&self.content_column)
            .map_err(|_| TransformError::MissingColumn(self.content_column.clone()))?;
        let mut langs = Vec::with_capacity(texts.len());
        let mut scores = Vec::with_capacity(texts.len());
        let mut meta = Statistics::new();
        for t in texts {
            let (lang, score) = self.identifier.identify(t);
            meta.add(&format!("lang_{lang}"), 1.0);
            langs.push(lang.to_string());
            scores.push(score);
        }
        meta.add("nrows", table.num_rows() as f64);
        let table = table
            .with_column(&self.lang_column, ColumnData::String(langs))?
            .with_column(&self.score_column, ColumnData::Float64(scores))?;
        Ok((vec![table], meta))
    }
}

pub struct LangIdConfiguration;

impl TransformConfiguration for LangIdConfiguration {
    fn spec(&self) -> TransformConfigSpec {
        TransformConfigSpec::new("lang_id")
            .param(content_column_param())
            .param(ParamDef::optional(
                "lang_column",
                ParamValue::Str("lang".into()),
                "column receiving the language code",
            ))
            .param(ParamDef::optional(
                "score_column",
                ParamValue::Str("lang_score".into()),
                "column receiving the score in [0, 1]",
            ))
            .validator(|p| {
                if p.str("lang_column") == p.str("score_column") {
                    return Err(p.invalid("score_column", "must differ from lang_id_lang_column"));
                }
                Ok(())
            })
    }

    fn prepare(&self, params: &Params, _ctx: &JobContext) -> Result<Box<dyn TransformJob>, TransformError> {
        let identifier = LangIdentifier::builtin();
        let (content, lang, score) = (
            params.str("content_column").to_string(),
            params.str("lang_column").to_string(),
            params.str("score_column").to_string(),
        );
        Ok(Box::new(PerWorker(move |_| LangIdTransform {
            content_column: content.clone(),
            lang_column: lang.clone(),
            score_column: score.clone(),
            identifier: identifier.clone(),
        })))
    }
}
