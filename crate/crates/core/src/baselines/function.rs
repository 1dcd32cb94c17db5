use std::collections::{BTreeMap, BTreeSet};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassLabel, FunctionInstance, FunctionLabel};
use crate::error::{Error, Result};
use crate::text::tokenize;

pub const DEFAULT_UNIGRAM_COUNT: usize = 300;

/// A parenthesized or bracketed group, without nested brackets, containing a
/// year from 1900 to 2099 (optionally with a letter suffix such as `2006a`).
static CITATION_MARKER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\([^()\[\]]*\b(?:19|20)\d{2}[a-z]?\b[^()\[\]]*\)|\[[^()\[\]]*\b(?:19|20)\d{2}[a-z]?\b[^()\[\]]*\]")
        .expect("valid pattern")
});

pub fn count_citation_markers(text: &str) -> usize {
    CITATION_MARKER.find_iter(text).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionFeatureVector {
    /// Context counts of each selected unigram, in selection order.
    pub unigram_reduced: Vec<f64>,
    pub citation_density: u64,
    pub year_difference: i64,
    /// Fraction of the citing paper's words before the citing sentence.
    pub citing_location: f64,
    pub citation_frequency: u64,
    pub same_author_citations: u64,
    pub self_reference: u8,
}

impl FunctionFeatureVector {
    pub const SCALAR_NAMES: [&'static str; 6] = [
        "citation_density",
        "year_difference",
        "citing_location",
        "citation_frequency",
        "same_author_citations",
        "self_reference",
    ];

    /// Non-negative pseudo-counts for multinomial naive Bayes: the location
    /// becomes a percentage rounded to an integer and negative year
    /// differences are clamped to zero.
    pub fn to_nb_counts(&self) -> Vec<f64> {
        let mut out = self.unigram_reduced.clone();
        out.extend([
            self.citation_density as f64,
            self.year_difference.max(0) as f64,
            (self.citing_location * 100.0).round(),
            self.citation_frequency as f64,
            self.same_author_citations as f64,
            f64::from(self.self_reference),
        ]);
        out
    }
}

fn context_tokens(instance: &FunctionInstance) -> Vec<String> {
    instance.citation_context().iter().flat_map(|s| tokenize(s)).collect()
}

pub fn extract_function_features(instance: &FunctionInstance, unigrams: &[String]) -> FunctionFeatureVector {
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    for t in context_tokens(instance) {
        *counts.entry(t).or_default() += 1.0;
    }
    let unigram_reduced = unigrams.iter().map(|u| counts.get(u).copied().unwrap_or(0.0)).collect();
    let citation_density = instance
        .citation_context()
        .iter()
        .map(|s| count_citation_markers(s) as u64)
        .sum();
    let year_difference = match (instance.citing_year, instance.cited_year) {
        (Some(a), Some(b)) => i64::from(a) - i64::from(b),
        _ => 0,
    };
    let citing_location = match (instance.words_before_citing, instance.total_words_in_paper) {
        (Some(before), Some(total)) if before < total => before as f64 / total as f64,
        _ => 0.0,
    };
    let self_reference = match (&instance.citing_authors, &instance.cited_authors) {
        (Some(a), Some(b)) => u8::from(!a.is_disjoint(b)),
        _ => 0,
    };
    FunctionFeatureVector {
        unigram_reduced,
        citation_density,
        year_difference,
        citing_location,
        citation_frequency: instance.cited_paper_mention_count.unwrap_or(0),
        same_author_citations: instance.same_author_citation_count.unwrap_or(0),
        self_reference,
    }
}

/// Pearson chi-squared statistic of a 2×C presence/class table.
fn chi_squared(present: &[usize], class_totals: &[usize], n: usize) -> f64 {
    let p_total: usize = present.iter().sum();
    let a_total = n - p_total;
    let mut chi = 0.0;
    for (c, &total) in class_totals.iter().enumerate() {
        for (observed, row) in [(present[c], p_total), (total - present[c], a_total)] {
            let expected = row as f64 * total as f64 / n as f64;
            if expected > 0.0 {
                chi += (observed as f64 - expected).powi(2) / expected;
            }
        }
    }
    chi
}

/// The `k` context unigrams whose presence is most associated with the
/// class label; equal scores are ordered lexicographically.
pub fn select_unigrams(train: &[&FunctionInstance], k: usize) -> Result<Vec<String>> {
    if train.is_empty() {
        return Err(Error::invalid("unigram selection needs a non-empty training set"));
    }
    let classes = FunctionLabel::count();
    let mut class_totals = vec![0usize; classes];
    let mut presence: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for inst in train {
        let c = inst.label.index();
        class_totals[c] += 1;
        let types: BTreeSet<String> = context_tokens(inst).into_iter().collect();
        for t in types {
            presence.entry(t).or_insert_with(|| vec![0; classes])[c] += 1;
        }
    }
    let n = train.len();
    let mut scored: Vec<(f64, String)> = presence
        .into_iter()
        .map(|(w, p)| (chi_squared(&p, &class_totals, n), w))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, w)| w).collect())
}
