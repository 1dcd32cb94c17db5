//! Citation datasets: instance types, JSONL loaders, provenance negative
//! sampling, candidate mining for selective annotation, and fold splitting.

mod candidates;
mod folds;
mod io;
mod labels;
mod sampling;

use std::collections::BTreeSet;

pub use candidates::{
    select_candidates, CandidateReason, CuePhraseTable, LexiconScorer, SelectedCandidate, SentimentScorer,
    DEFAULT_SENTIMENT_CUTOFF,
};
pub use folds::{grouped_kfold, ungrouped_kfold, Fold};
pub use io::{
    load_annotations, load_function_corpus, load_paper, load_papers_dir, load_provenance_annotations,
    load_provenance_corpus, materialize_annotations, save_function_corpus, save_provenance_corpus,
    ProvenanceAnnotation,
};
pub use labels::{ClassLabel, FunctionLabel, ProvenanceLabel};
pub use sampling::{build_provenance_dataset, sample_negatives, Citation};

use crate::error::{Error, Result};

/// One citation labeled with its rhetorical function.
///
/// Metadata fields are `None` when the source file marks them unknown; the
/// baseline features derived from them then default to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionInstance {
    pub id: String,
    pub citing_sentence: String,
    pub context_prev: String,
    pub context_next: String,
    pub label: FunctionLabel,
    pub citing_paper_id: String,
    pub cited_paper_id: String,
    pub citing_year: Option<i32>,
    pub cited_year: Option<i32>,
    pub citing_authors: Option<BTreeSet<String>>,
    pub cited_authors: Option<BTreeSet<String>>,
    pub words_before_citing: Option<u64>,
    pub total_words_in_paper: Option<u64>,
    pub cited_paper_mention_count: Option<u64>,
    pub same_author_citation_count: Option<u64>,
}

impl FunctionInstance {
    /// A bare instance with every metadata field unknown.
    pub fn new(id: impl Into<String>, citing_sentence: impl Into<String>, label: FunctionLabel) -> Self {
        Self {
            id: id.into(),
            citing_sentence: citing_sentence.into(),
            context_prev: String::new(),
            context_next: String::new(),
            label,
            citing_paper_id: String::new(),
            cited_paper_id: String::new(),
            citing_year: None,
            cited_year: None,
            citing_authors: None,
            cited_authors: None,
            words_before_citing: None,
            total_words_in_paper: None,
            cited_paper_mention_count: None,
            same_author_citation_count: None,
        }
    }

    /// Previous, citing and following sentence.
    pub fn citation_context(&self) -> [&str; 3] {
        [&self.context_prev, &self.citing_sentence, &self.context_next]
    }

    pub fn validate(&self) -> Result<()> {
        if let (Some(before), Some(total)) = (self.words_before_citing, self.total_words_in_paper) {
            if total == 0 {
                return Err(Error::invalid(format!(
                    "{}: total_words_in_paper must be positive",
                    self.id
                )));
            }
            if before >= total {
                return Err(Error::invalid(format!(
                    "{}: words_before_citing ({before}) must be below total_words_in_paper ({total})",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// A (citation, candidate fragment) pair from the cited paper.
#[derive(Debug, Clone, PartialEq)]
pub struct ProvenanceInstance {
    pub id: String,
    pub citing_sentence: String,
    pub context_prev: String,
    pub context_next: String,
    pub fragment: String,
    pub label: ProvenanceLabel,
    /// Grouping key for cross-validation.
    pub cited_paper_id: String,
}

impl ProvenanceInstance {
    pub fn citation_context(&self) -> [&str; 3] {
        [&self.context_prev, &self.citing_sentence, &self.context_next]
    }

    pub fn validate(&self) -> Result<()> {
        if self.fragment.trim().is_empty() {
            return Err(Error::invalid(format!("{}: empty fragment", self.id)));
        }
        if self.cited_paper_id.is_empty() {
            return Err(Error::invalid(format!("{}: empty cited_paper_id", self.id)));
        }
        Ok(())
    }
}

/// Sentence-segmented text of one paper.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperRecord {
    paper_id: String,
    sentences: Vec<(usize, String)>,
}

impl PaperRecord {
    pub fn new(paper_id: impl Into<String>, sentences: Vec<(usize, String)>) -> Result<Self> {
        let paper_id = paper_id.into();
        if sentences.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid(format!(
                "paper {paper_id}: sentence indices must be unique and ascending"
            )));
        }
        Ok(Self { paper_id, sentences })
    }

    /// Sentences indexed by position, as read from a one-sentence-per-line file.
    pub fn from_lines<S: Into<String>>(paper_id: impl Into<String>, lines: impl IntoIterator<Item = S>) -> Self {
        Self {
            paper_id: paper_id.into(),
            sentences: lines.into_iter().map(Into::into).enumerate().collect(),
        }
    }

    pub fn paper_id(&self) -> &str {
        &self.paper_id
    }

    pub fn sentences(&self) -> &[(usize, String)] {
        &self.sentences
    }

    fn position(&self, index: usize) -> Option<usize> {
        self.sentences.binary_search_by_key(&index, |(i, _)| *i).ok()
    }

    pub fn sentence(&self, index: usize) -> Option<&str> {
        self.position(index).map(|p| self.sentences[p].1.as_str())
    }
}

/// Previous, citing and following sentence around `citing_index`; missing
/// neighbours at the document boundaries are empty strings.
pub fn extract_context(paper: &PaperRecord, citing_index: usize) -> Result<[String; 3]> {
    let pos = paper
        .position(citing_index)
        .ok_or_else(|| Error::DanglingReference(format!("sentence {citing_index} of paper {}", paper.paper_id)))?;
    let s = &paper.sentences;
    let prev = if pos > 0 { s[pos - 1].1.clone() } else { String::new() };
    let next = s.get(pos + 1).map(|(_, t)| t.clone()).unwrap_or_default();
    Ok([prev, s[pos].1.clone(), next])
}

/// Lowercased, whitespace-collapsed author name.
pub fn normalize_author(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Per-class instance counts in `ClassLabel` order.
pub fn class_counts<L: ClassLabel>(labels: impl IntoIterator<Item = L>) -> Vec<usize> {
    let mut counts = vec![0; L::count()];
    for l in labels {
        counts[l.index()] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> PaperRecord {
        PaperRecord::from_lines("P1", ["s0", "s1", "s2", "s3"])
    }

    #[test]
    fn context_in_the_middle() {
        assert_eq!(extract_context(&paper(), 1).unwrap(), ["s0", "s1", "s2"]);
    }

    #[test]
    fn context_at_boundaries() {
        assert_eq!(extract_context(&paper(), 0).unwrap(), ["", "s0", "s1"]);
        assert_eq!(extract_context(&paper(), 3).unwrap(), ["s2", "s3", ""]);
    }

    #[test]
    fn context_of_absent_index() {
        assert!(matches!(extract_context(&paper(), 9), Err(Error::DanglingReference(_))));
    }

    #[test]
    fn paper_indices_must_ascend() {
        assert!(PaperRecord::new("P", vec![(2, "a".into()), (1, "b".into())]).is_err());
        assert!(PaperRecord::new("P", vec![(1, "a".into()), (1, "b".into())]).is_err());
        let p = PaperRecord::new("P", vec![(3, "a".into()), (7, "b".into())]).unwrap();
        assert_eq!(p.sentence(7), Some("b"));
        assert_eq!(p.sentence(4), None);
    }

    #[test]
    fn words_before_must_be_below_total() {
        let mut inst = FunctionInstance::new("x", "s", FunctionLabel::Neut);
        inst.words_before_citing = Some(10);
        inst.total_words_in_paper = Some(10);
        assert!(inst.validate().is_err());
        inst.total_words_in_paper = Some(11);
        inst.validate().unwrap();
    }

    #[test]
    fn author_normalization() {
        assert_eq!(normalize_author("  Simone   Teufel "), "simone teufel");
    }
}
