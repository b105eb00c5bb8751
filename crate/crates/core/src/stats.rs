use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::{Deserialize, Deserializer};

/// Named numeric counters. Merging sums per key.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Statistics {
    counters: BTreeMap<String, f64>,
}

impl Statistics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, key: &str, value: f64) {
        *self.counters.entry(key.to_string()).or_insert(0.0) += value;
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.counters.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> f64 {
        self.counters.get(key).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.counters.contains_key(key)
    }

    pub fn merge(&mut self, other: &Statistics) {
        for (k, v) in &other.counters {
            *self.counters.entry(k.clone()).or_insert(0.0) += v;
        }
    }

    pub fn len(&self) -> usize {
        self.counters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.counters.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.counters
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for Statistics {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        let mut s = Statistics::new();
        for (k, v) in iter {
            s.add(&k.into(), v);
        }
        s
    }
}

/// Per-key sum over all parts.
pub fn merge_statistics<'a>(parts: impl IntoIterator<Item = &'a Statistics>) -> Statistics {
    let mut total = Statistics::new();
    for p in parts {
        total.merge(p);
    }
    total
}

/// Whole-valued counters serialize as JSON integers.
impl Serialize for Statistics {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.counters.len()))?;
        for (k, v) in &self.counters {
            if v.fract() == 0.0 && v.abs() < 9.0e15 {
                map.serialize_entry(k, &(*v as i64))?;
            } else {
                map.serialize_entry(k, v)?;
            }
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Statistics {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(deserializer)?;
        Ok(map.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_examples() {
        let a: Statistics = [("a", 1.0)].into_iter().collect();
        let b: Statistics = [("a", 2.0), ("b", 3.0)].into_iter().collect();
        let m = merge_statistics([&a, &b]);
        assert_eq!(m.get("a"), 3.0);
        assert_eq!(m.get("b"), 3.0);
        assert!(merge_statistics([]).is_empty());
        let mut id = a.clone();
        id.merge(&Statistics::new());
        assert_eq!(id, a);
    }

    #[test]
    fn serializes_integers_as_integers() {
        let s: Statistics = [("n", 3.0), ("t", 0.25)].into_iter().collect();
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"n":3,"t":0.25}"#);
    }
}
