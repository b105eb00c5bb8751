//! Seeded synthetic corpora with planted exact and near duplicates.
//!
//! Contents are word soup over a skewed random vocabulary. Planted groups
//! are listed in `truth.json` as `[file, row]` positions, original first.
//! Exact groups are pairs (one triple when the row budget is odd) whose
//! members together cover `round(dup_fraction * rows)` rows. Near groups are
//! pairs whose second document substitutes isolated words of the first to
//! approach the target word-5-shingle Jaccard.

use std::fs;
use std::path::Path;

use dpk_core::DocTable;
use dpk_transforms::fdedup::{jaccard, shingle};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TRUTH_FILE: &str = "truth.json";
const SHINGLE: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_files: usize,
    pub rows_per_file: usize,
    pub dup_fraction: f64,
    pub near_dup_fraction: f64,
    pub near_dup_jaccard: f64,
    pub min_words: usize,
    pub max_words: usize,
    pub vocabulary: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_files: 10,
            rows_per_file: 100,
            dup_fraction: 0.0,
            near_dup_fraction: 0.0,
            near_dup_jaccard: 0.9,
            min_words: 50,
            max_words: 150,
            vocabulary: 20_000,
            seed: 42,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let frac = |f: f64| (0.0..=1.0).contains(&f);
        if !frac(self.dup_fraction) || !frac(self.near_dup_fraction) {
            return Err(CliError::Usage("fractions must lie in [0, 1]".into()));
        }
        if self.dup_fraction + self.near_dup_fraction > 1.0 {
            return Err(CliError::Usage("dup_fraction + near_dup_fraction must not exceed 1".into()));
        }
        if !(self.near_dup_jaccard > 0.0 && self.near_dup_jaccard < 1.0) {
            return Err(CliError::Usage("near_dup_jaccard must lie in (0, 1)".into()));
        }
        if self.min_words < SHINGLE || self.max_words < self.min_words || self.vocabulary < 2 {
            return Err(CliError::Usage(format!("need {SHINGLE} <= min_words <= max_words and vocabulary >= 2")));
        }
        Ok(())
    }

    pub fn total_rows(&self) -> usize {
        self.n_files * self.rows_per_file
    }
}

pub type Position = (usize, usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearGroup {
    pub members: Vec<Position>,
    pub jaccard: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub spec: CorpusSpec,
    pub exact_groups: Vec<Vec<Position>>,
    pub near_groups: Vec<NearGroup>,
}

impl Truth {
    pub fn covered_exact_rows(&self) -> usize {
        self.exact_groups.iter().map(Vec::len).sum()
    }
}

fn word(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(2..=9);
    (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
}

struct Soup {
    vocab: Vec<String>,
}

impl Soup {
    fn new(rng: &mut ChaCha8Rng, n: usize) -> Self {
        Soup { vocab: (0..n).map(|_| word(rng)).collect() }
    }

    /// Skewed draw: low indices are much more frequent.
    fn draw<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a str {
        let u: f64 = rng.random();
        &self.vocab[((u * u * u) * self.vocab.len() as f64) as usize % self.vocab.len()]
    }

    fn doc(&self, rng: &mut ChaCha8Rng, words: usize) -> Vec<String> {
        (0..words).map(|_| self.draw(rng).to_string()).collect()
    }
}

/// Substitutes isolated words so about `target` of the shingles survive.
fn perturb(rng: &mut ChaCha8Rng, soup: &Soup, words: &[String], target: f64) -> Vec<String> {
    let shingles = words.len() + 1 - SHINGLE;
    let k = SHINGLE as f64;
    let wanted = (shingles as f64 * (1.0 - target) / (k * (1.0 + target))).round() as usize;
    let slots = words.len() / SHINGLE;
    let subs = wanted.clamp(1, slots.max(1));
    let mut out = words.to_vec();
    let mut chosen: Vec<usize> = (0..slots).collect();
    chosen.shuffle(rng);
    for slot in chosen.into_iter().take(subs) {
        let pos = slot * SHINGLE + SHINGLE / 2;
        let pos = pos.min(out.len() - 1);
        loop {
            let w = soup.draw(rng);
            if w != out[pos] {
                out[pos] = w.to_string();
                break;
            }
        }
    }
    out
}

/// Contents per file plus ground truth, without touching disk.
pub fn generate_docs(spec: &CorpusSpec) -> Result<(Vec<Vec<String>>, Truth), CliError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let soup = Soup::new(&mut rng, spec.vocabulary);
    let n = spec.total_rows();
    let mut docs: Vec<Vec<String>> = (0..n)
        .map(|_| {
            let len = rng.random_range(spec.min_words..=spec.max_words);
            soup.doc(&mut rng, len)
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let exact_rows = ((spec.dup_fraction * n as f64).round() as usize).min(n);
    let near_rows = ((spec.near_dup_fraction * n as f64).round() as usize).min(n - exact_rows);
    let (exact, rest) = order.split_at(exact_rows);
    let near = &rest[..near_rows - near_rows % 2];

    let pos = |i: usize| (i / spec.rows_per_file, i % spec.rows_per_file);
    let mut exact_groups = Vec::new();
    if exact.len() >= 2 {
        let mut groups: Vec<Vec<usize>> = exact.chunks(2).map(<[usize]>::to_vec).collect();
        if let Some(lone) = groups.pop_if(|g| g.len() == 1) {
            groups.last_mut().unwrap().extend(lone);
        }
        for mut g in groups {
            g.sort_unstable();
            for &m in &g[1..] {
                docs[m] = docs[g[0]].clone();
            }
            exact_groups.push(g.into_iter().map(pos).collect::<Vec<_>>());
        }
    }
    let mut near_groups = Vec::new();
    for pair in near.chunks(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        docs[b] = perturb(&mut rng, &soup, &docs[a], spec.near_dup_jaccard);
        let j = jaccard(&shingle(&docs[a].join(" "), SHINGLE), &shingle(&docs[b].join(" "), SHINGLE));
        near_groups.push(NearGroup { members: vec![pos(a), pos(b)], jaccard: j });
    }
    exact_groups.sort();
    near_groups.sort_by(|x, y| x.members.cmp(&y.members));

    let files = docs.chunks(spec.rows_per_file.max(1)).map(|c| c.iter().map(|w| w.join(" ")).collect()).collect();
    Ok((files, Truth { spec: spec.clone(), exact_groups, near_groups }))
}

pub fn file_name(index: usize) -> String {
    format!("part-{index:05}.parquet")
}

/// Writes `part-NNNNN.parquet` files and `truth.json` under `out`.
pub fn generate_corpus(spec: &CorpusSpec, out: &Path) -> Result<Truth, CliError> {
    let (files, truth) = generate_docs(spec)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    for (i, rows) in files.into_iter().enumerate() {
        let bytes = DocTable::from_contents(rows).to_parquet().map_err(|e| CliError::Usage(e.to_string()))?;
        let path = out.join(file_name(i));
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
    }
    let path = out.join(TRUTH_FILE);
    let json = serde_json::to_vec_pretty(&truth).map_err(|e| CliError::Usage(e.to_string()))?;
    fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
    Ok(truth)
}
