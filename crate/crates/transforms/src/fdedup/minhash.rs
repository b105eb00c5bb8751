//! MinHash signatures under affine permutations modulo the Mersenne prime
//! 2^61 - 1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// `v mod (2^61 - 1)` for any `v < 2^122 + 2^64`.
#[inline]
pub fn mod_mersenne(v: u128) -> u64 {
    let p = MERSENNE_61 as u128;
    let v = (v & p) + (v >> 61);
    let v = (v & p) + (v >> 61);
    let r = v as u64;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

/// Rows `(a_i, b_i)` with `a_i` in `[1, p)` and `b_i` in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutations {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

impl Permutations {
    pub fn new(num_permutations: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::with_capacity(num_permutations);
        let mut b = Vec::with_capacity(num_permutations);
        for _ in 0..num_permutations {
            a.push(rng.random_range(1..MERSENNE_61));
            b.push(rng.random_range(0..MERSENNE_61));
        }
        Permutations { a, b }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `(a_i * x + b_i) mod p`.
    #[inline]
    pub fn apply(&self, i: usize, x: u64) -> u64 {
        mod_mersenne(self.a[i] as u128 * (x % MERSENNE_61) as u128 + self.b[i] as u128)
    }

    /// Per-permutation minima over `shingles`; `None` for an empty set.
    pub fn signature(&self, shingles: &[u64]) -> Option<Vec<u64>> {
        if shingles.is_empty() {
            return None;
        }
        let mut mins = vec![u64::MAX; self.len()];
        for &x in shingles {
            let x = (x % MERSENNE_61) as u128;
            for (m, (&a, &b)) in mins.iter_mut().zip(self.a.iter().zip(&self.b)) {
                let v = mod_mersenne(a as u128 * x + b as u128);
                if v < *m {
                    *m = v;
                }
            }
        }
        Some(mins)
    }
}

/// Fraction of equal slots.
pub fn estimate_jaccard(a: &[u64], b: &[u64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn oracle(a: u64, x: u64, b: u64) -> u64 {
        ((a as u128 * x as u128 + b as u128) % MERSENNE_61 as u128) as u64
    }

    proptest! {
        #[test]
        fn reduction_matches_modulo(v in any::<u128>()) {
            let v = v >> 6;
            prop_assert_eq!(mod_mersenne(v) as u128, v % MERSENNE_61 as u128);
        }

        #[test]
        fn apply_matches_wide_arithmetic(x in any::<u64>(), seed in any::<u64>()) {
            let p = Permutations::new(4, seed);
            for i in 0..4 {
                prop_assert_eq!(p.apply(i, x), oracle(p.a[i], x, p.b[i]));
            }
        }

        #[test]
        fn superset_minima_never_larger(xs in proptest::collection::vec(any::<u64>(), 1..30),
                                        extra in proptest::collection::vec(any::<u64>(), 0..30)) {
            let p = Permutations::new(16, 1);
            let mut s1 = xs.clone();
            s1.sort_unstable(); s1.dedup();
            let mut s2: Vec<u64> = xs.into_iter().chain(extra).collect();
            s2.sort_unstable(); s2.dedup();
            let (m1, m2) = (p.signature(&s1).unwrap(), p.signature(&s2).unwrap());
            prop_assert!(m2.iter().zip(&m1).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn edge_reductions() {
        let p = MERSENNE_61 as u128;
        for v in [0, 1, p - 1, p, p + 1, 2 * p, p * p, (p - 1) * (p - 1) + p - 1] {
            assert_eq!(mod_mersenne(v) as u128, v % p, "{v}");
        }
    }

    #[test]
    fn singleton_signature_is_the_permutation_value() {
        let p = Permutations::new(64, 42);
        let x = 0xDEAD_BEEF_CAFE_F00D;
        let sig = p.signature(&[x]).unwrap();
        for (i, s) in sig.iter().enumerate() {
            assert_eq!(*s, oracle(p.a[i], x, p.b[i]));
        }
        assert!(p.signature(&[]).is_none());
    }

    #[test]
    fn seeded_table_is_deterministic_and_in_range() {
        let p = Permutations::new(64, 42);
        assert_eq!(p, Permutations::new(64, 42));
        assert_ne!(p, Permutations::new(64, 43));
        assert!(p.a.iter().all(|&a| (1..MERSENNE_61).contains(&a)));
        assert!(p.b.iter().all(|&b| b < MERSENNE_61));
    }
}
