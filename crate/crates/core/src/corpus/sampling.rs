use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{materialize_annotations, PaperRecord, ProvenanceAnnotation, ProvenanceInstance, ProvenanceLabel};
use crate::error::{Error, Result};
use crate::util::{derive_seed, fnv1a};

/// The citing side of a provenance pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Citation {
    pub id: String,
    pub citing_sentence: String,
    pub context_prev: String,
    pub context_next: String,
}

impl From<&ProvenanceAnnotation> for Citation {
    fn from(a: &ProvenanceAnnotation) -> Self {
        Self {
            id: a.id.clone(),
            citing_sentence: a.citing_sentence.clone(),
            context_prev: a.context_prev.clone(),
            context_next: a.context_next.clone(),
        }
    }
}

/// Draws up to `n` unannotated sentences of `paper` as `NonProv` fragments,
/// uniformly without replacement, and pairs each with a citation of that
/// paper drawn uniformly from `citations`.
///
/// Blank lines are never drawn since a fragment must be non-empty. Returns
/// fewer than `n` instances when the paper runs out of candidates, and none
/// when `citations` is empty.
pub fn sample_negatives(
    paper: &PaperRecord,
    annotated: &BTreeSet<usize>,
    citations: &[Citation],
    n: usize,
    seed: u64,
) -> Vec<ProvenanceInstance> {
    if citations.is_empty() {
        return Vec::new();
    }
    let pool: Vec<&(usize, String)> = paper
        .sentences()
        .iter()
        .filter(|(i, text)| !annotated.contains(i) && !text.trim().is_empty())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amount = n.min(pool.len());
    let mut picked = index::sample(&mut rng, pool.len(), amount).into_vec();
    picked.sort_unstable();
    picked
        .into_iter()
        .map(|p| {
            let (sentence_index, text) = pool[p];
            let citation = &citations[rng.random_range(0..citations.len())];
            ProvenanceInstance {
                id: format!("{}-neg-{sentence_index}", paper.paper_id()),
                citing_sentence: citation.citing_sentence.clone(),
                context_prev: citation.context_prev.clone(),
                context_next: citation.context_next.clone(),
                fragment: text.clone(),
                label: ProvenanceLabel::NonProv,
                cited_paper_id: paper.paper_id().to_string(),
            }
        })
        .collect()
}

/// Materializes every annotation as a positive, then samples
/// `negatives_per_paper` negatives from each annotated cited paper.
///
/// Each paper's sampling seed is derived from `seed` and the paper id, so
/// adding papers leaves the other papers' draws untouched.
pub fn build_provenance_dataset(
    annotations: &[ProvenanceAnnotation],
    papers: &BTreeMap<String, PaperRecord>,
    negatives_per_paper: usize,
    seed: u64,
) -> Result<Vec<ProvenanceInstance>> {
    if negatives_per_paper == 0 {
        return Err(Error::invalid("negatives per paper must be at least 1"));
    }
    let mut out = materialize_annotations(annotations, papers)?;

    let mut by_paper: BTreeMap<&str, (BTreeSet<usize>, Vec<Citation>)> = BTreeMap::new();
    for a in annotations {
        let entry = by_paper.entry(a.cited_paper_id.as_str()).or_default();
        entry.0.extend(a.fragment_sentence_indices.iter().copied());
        entry.1.push(Citation::from(a));
    }
    for (paper_id, (annotated, citations)) in by_paper {
        let paper = &papers[paper_id];
        let paper_seed = derive_seed(seed, fnv1a(paper_id));
        out.extend(sample_negatives(
            paper,
            &annotated,
            &citations,
            negatives_per_paper,
            paper_seed,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn paper(n: usize) -> PaperRecord {
        PaperRecord::from_lines("P1", (0..n).map(|i| format!("sentence {i}")))
    }

    fn citations() -> Vec<Citation> {
        vec![Citation {
            id: "c".into(),
            citing_sentence: "we cite (X, 2001)".into(),
            context_prev: String::new(),
            context_next: String::new(),
        }]
    }

    #[test]
    fn three_from_ten() {
        let annotated: BTreeSet<usize> = [2, 5].into();
        let v = sample_negatives(&paper(10), &annotated, &citations(), 3, 7);
        assert_eq!(v.len(), 3);
        for inst in &v {
            assert_eq!(inst.label, ProvenanceLabel::NonProv);
            assert_eq!(inst.cited_paper_id, "P1");
            assert!(inst.fragment != "sentence 2" && inst.fragment != "sentence 5");
        }
    }

    #[test]
    fn capped_by_available() {
        let annotated: BTreeSet<usize> = [0, 1].into();
        assert_eq!(sample_negatives(&paper(4), &annotated, &citations(), 3, 1).len(), 2);
        let all: BTreeSet<usize> = (0..4).collect();
        assert!(sample_negatives(&paper(4), &all, &citations(), 3, 1).is_empty());
    }

    #[test]
    fn seeded_draws_repeat() {
        let annotated: BTreeSet<usize> = [3].into();
        let a = sample_negatives(&paper(30), &annotated, &citations(), 3, 99);
        let b = sample_negatives(&paper(30), &annotated, &citations(), 3, 99);
        assert_eq!(a, b);
    }

    #[test]
    fn blank_lines_are_not_fragments() {
        let p = PaperRecord::from_lines("P", ["a", "", "  ", "b"]);
        let v = sample_negatives(&p, &BTreeSet::new(), &citations(), 3, 0);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|i| !i.fragment.trim().is_empty()));
    }

    proptest! {
        #[test]
        fn never_returns_annotated(n_sent in 1usize..40, ann in proptest::collection::btree_set(0usize..40, 0..20), n in 1usize..6, seed: u64) {
            let p = paper(n_sent);
            let v = sample_negatives(&p, &ann, &citations(), n, seed);
            let available = (0..n_sent).filter(|i| !ann.contains(i)).count();
            prop_assert_eq!(v.len(), n.min(available));
            let drawn: BTreeSet<&str> = v.iter().map(|i| i.fragment.as_str()).collect();
            prop_assert_eq!(drawn.len(), v.len());
            for i in &ann {
                let annotated_text = format!("sentence {i}");
                prop_assert!(!drawn.contains(annotated_text.as_str()));
            }
        }
    }
}
