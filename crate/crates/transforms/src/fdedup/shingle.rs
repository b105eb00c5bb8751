//! Word shingles hashed with XXH3-64 (seed 0).

use xxhash_rust::xxh3::xxh3_64;

/// Name of the stable hash used for shingles and band keys.
pub const STABLE_HASH: &str = "xxh3_64";

pub fn stable_hash(bytes: &[u8]) -> u64 {
    xxh3_64(bytes)
}

/// Lowercased words, split on Unicode whitespace.
pub fn normalized_words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Sorted, deduplicated hashes of every contiguous `k`-word window. Empty
/// when the text has fewer than `k` words.
pub fn shingle(text: &str, k: usize) -> Vec<u64> {
    assert!(k >= 1, "shingle size must be >= 1");
    let words = normalized_words(text);
    if words.len() < k {
        return Vec::new();
    }
    let mut buf = String::new();
    let mut hashes: Vec<u64> = words
        .windows(k)
        .map(|w| {
            buf.clear();
            for (i, word) in w.iter().enumerate() {
                if i > 0 {
                    buf.push(' ');
                }
                buf.push_str(word);
            }
            stable_hash(buf.as_bytes())
        })
        .collect();
    hashes.sort_unstable();
    hashes.dedup();
    hashes
}

/// Exact Jaccard similarity of two sorted, deduplicated sets.
pub fn jaccard(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    inter as f64 / (a.len() + b.len() - inter) as f64
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn window_count() {
        let s = shingle("a b c d e f", 5);
        let mut expected = vec![stable_hash(b"a b c d e"), stable_hash(b"b c d e f")];
        expected.sort();
        assert_eq!(s, expected);
    }

    #[test]
    fn short_document_is_empty() {
        assert!(shingle("a b", 5).is_empty());
        assert!(shingle("", 1).is_empty());
    }

    #[test]
    fn normalization() {
        assert_eq!(shingle("A  b\tC", 2), shingle("a b c", 2));
        assert_eq!(shingle(" x\u{3000}Y\n", 2), shingle("x y", 2));
    }

    #[test]
    fn xxh3_is_stable() {
        // Published XXH3-64 value for the empty input.
        assert_eq!(stable_hash(b""), 0x2D06800538D394C2);
    }

    #[test]
    fn jaccard_matches_set_oracle() {
        let a = shingle("the quick brown fox jumps over the lazy dog today", 3);
        let b = shingle("the quick brown fox leaps over the lazy dog today", 3);
        let sa: HashSet<_> = a.iter().collect();
        let sb: HashSet<_> = b.iter().collect();
        let expected = sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64;
        assert_eq!(jaccard(&a, &b), expected);
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(jaccard(&a, &[]), 0.0);
    }
}
