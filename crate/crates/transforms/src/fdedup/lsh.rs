//! LSH banding.

use super::shingle::stable_hash;

/// Picks `(bands, rows)` with `bands * rows == num_permutations` minimizing
/// `|(1/bands)^(1/rows) - threshold|`; ties go to the larger `rows`.
pub fn lsh_bands(threshold: f64, num_permutations: usize) -> Option<(usize, usize)> {
    if num_permutations == 0 {
        return None;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for rows in 1..=num_permutations {
        if !num_permutations.is_multiple_of(rows) {
            continue;
        }
        let bands = num_permutations / rows;
        let dist = (implied_threshold(bands, rows) - threshold).abs();
        // rows ascends, so `<=` prefers larger rows on ties
        if best.is_none_or(|(d, _, _)| dist <= d) {
            best = Some((dist, bands, rows));
        }
    }
    best.map(|(_, b, r)| (b, r))
}

/// Similarity at which a pair becomes a candidate with probability ~1/2.
pub fn implied_threshold(bands: usize, rows: usize) -> f64 {
    (1.0 / bands as f64).powf(1.0 / rows as f64)
}

/// Probability that a pair of similarity `s` shares at least one band.
pub fn candidate_probability(s: f64, bands: usize, rows: usize) -> f64 {
    1.0 - (1.0 - s.powi(rows as i32)).powi(bands as i32)
}

/// Stable key of band `band` of a signature.
pub fn band_key(band: usize, rows: &[u64]) -> u64 {
    let mut buf = Vec::with_capacity(4 + 8 * rows.len());
    buf.extend_from_slice(&(band as u32).to_le_bytes());
    for v in rows {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    stable_hash(&buf)
}

pub fn band_keys(signature: &[u64], bands: usize, rows: usize) -> Vec<u64> {
    assert_eq!(signature.len(), bands * rows);
    signature.chunks(rows).enumerate().map(|(i, c)| band_key(i, c)).collect()
}
