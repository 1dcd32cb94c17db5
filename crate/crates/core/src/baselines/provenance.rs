use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceFeatureVector {
    pub surface_matching: u64,
    pub number_matching: u64,
    pub bigram_matching: u64,
    pub cosine_similarity: f64,
}

impl ProvenanceFeatureVector {
    pub const NAMES: [&'static str; 4] = [
        "surface_matching",
        "number_matching",
        "bigram_matching",
        "cosine_similarity",
    ];

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.surface_matching as f64,
            self.number_matching as f64,
            self.bigram_matching as f64,
            self.cosine_similarity,
        ]
    }
}

/// Digits, optionally followed by a period and more digits.
pub fn is_decimal_number(token: &str) -> bool {
    let mut parts = token.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let ok = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    ok(int) && parts.next().is_none_or(ok)
}

struct Side {
    counts: BTreeMap<String, f64>,
    bigrams: BTreeSet<(String, String)>,
}

impl Side {
    /// Bigrams never span two separate texts.
    fn new(texts: &[&str]) -> Self {
        let mut counts = BTreeMap::new();
        let mut bigrams = BTreeSet::new();
        for text in texts {
            let toks = tokenize(text);
            for pair in toks.windows(2) {
                bigrams.insert((pair[0].clone(), pair[1].clone()));
            }
            for t in toks {
                *counts.entry(t).or_insert(0.0) += 1.0;
            }
        }
        Self { counts, bigrams }
    }

    fn norm(&self) -> f64 {
        self.counts.values().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Overlap between a citation context (any number of sentences) and a
/// candidate fragment.
pub fn extract_provenance_features(context: &[&str], fragment: &str) -> ProvenanceFeatureVector {
    let a = Side::new(context);
    let b = Side::new(&[fragment]);
    let shared: Vec<&String> = a.counts.keys().filter(|k| b.counts.contains_key(*k)).collect();
    let dot: f64 = shared.iter().map(|k| a.counts[*k] * b.counts[*k]).sum();
    let norms = a.norm() * b.norm();
    let cosine_similarity = if norms > 0.0 { (dot / norms).min(1.0) } else { 0.0 };
    ProvenanceFeatureVector {
        surface_matching: shared.len() as u64,
        number_matching: shared.iter().filter(|k| is_decimal_number(k)).count() as u64,
        bigram_matching: a.bigrams.intersection(&b.bigrams).count() as u64,
        cosine_similarity,
    }
}
