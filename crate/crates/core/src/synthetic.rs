//! Seeded synthetic corpora with planted signal, for smoke tests,
//! acceptance checks and shipped fixtures.
//!
//! Words are pseudo-words (`f12`, `c305`, `kw2x4`), so embeddings are random
//! and carry no prior knowledge; all signal comes from which words occur.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{
    ClassLabel, FunctionInstance, FunctionLabel, PaperRecord, ProvenanceAnnotation, ProvenanceInstance, ProvenanceLabel,
};
use crate::text::{tokenize, EmbeddingTable};
use crate::util::derive_seed;

/// Vocabulary shared by every generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    /// Class-neutral words.
    pub filler: Vec<String>,
    /// Words that carry provenance signal when shared.
    pub content: Vec<String>,
    /// `keywords[c]` marks function class `c`.
    pub keywords: Vec<Vec<String>>,
}

impl Lexicon {
    pub fn new(filler: usize, content: usize, keywords_per_class: usize) -> Self {
        Self {
            filler: (0..filler).map(|i| format!("f{i}")).collect(),
            content: (0..content).map(|i| format!("c{i}")).collect(),
            keywords: (0..FunctionLabel::count())
                .map(|c| (0..keywords_per_class).map(|k| format!("kw{c}x{k}")).collect())
                .collect(),
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.filler
            .iter()
            .chain(&self.content)
            .chain(self.keywords.iter().flatten())
    }

    fn filler_run<R: Rng>(&self, rng: &mut R, len: usize) -> Vec<String> {
        (0..len)
            .map(|_| self.filler.choose(rng).expect("filler").clone())
            .collect()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::new(60, 400, 6)
    }
}

/// Fraction of each word vector's variance that comes from its group
/// centroid, mimicking how pretrained vectors cluster by topic.
pub const GROUP_SHARE: f64 = 0.5;

/// Gaussian vectors (per-coordinate deviation 0.5) for every lexicon word.
/// Filler words, content words and each keyword group share a centroid.
pub fn embeddings(lexicon: &Lexicon, dim: usize, seed: u64) -> EmbeddingTable {
    clustered_embeddings(lexicon, dim, GROUP_SHARE, seed)
}

/// As [`embeddings`] with `share` of the variance from the group centroid
/// (0 gives independent vectors).
pub fn clustered_embeddings(lexicon: &Lexicon, dim: usize, share: f64, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5).expect("valid deviation");
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| normal.sample(rng)).collect() };
    let groups: Vec<&Vec<String>> = [&lexicon.filler, &lexicon.content]
        .into_iter()
        .chain(lexicon.keywords.iter())
        .collect();
    let (a, b) = (share.sqrt(), (1.0 - share).sqrt());
    let mut table = EmbeddingTable::new(dim);
    for group in groups {
        let centroid = draw(&mut rng);
        for w in group {
            let v = draw(&mut rng)
                .iter()
                .zip(&centroid)
                .map(|(n, c)| a * c + b * n)
                .collect();
            table.insert(w.clone(), v).expect("dimension matches");
        }
    }
    table
}

/// Knobs for one citing sentence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceShape {
    pub filler: (usize, usize),
    pub keywords: (usize, usize),
    pub content: usize,
}

impl Default for SentenceShape {
    fn default() -> Self {
        Self {
            filler: (8, 16),
            keywords: (1, 2),
            content: 3,
        }
    }
}

/// A citing sentence as tokens plus the content words planted in it.
struct Citing {
    tokens: Vec<String>,
    content: Vec<String>,
}

fn citing<R: Rng>(rng: &mut R, lexicon: &Lexicon, shape: SentenceShape, class: usize) -> Citing {
    let len = rng.random_range(shape.filler.0..=shape.filler.1);
    let mut tokens = lexicon.filler_run(rng, len);
    let k = rng.random_range(shape.keywords.0..=shape.keywords.1);
    tokens.extend(lexicon.keywords[class].choose_multiple(rng, k).cloned());
    let content: Vec<String> = lexicon.content.choose_multiple(rng, shape.content).cloned().collect();
    tokens.extend(content.iter().cloned());
    tokens.shuffle(rng);
    Citing { tokens, content }
}

/// `n` function instances with uniformly drawn classes; one citing paper
/// per 4 instances.
pub fn function_corpus(lexicon: &Lexicon, shape: SentenceShape, n: usize, seed: u64) -> Vec<FunctionInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = FunctionLabel::ALL[rng.random_range(0..FunctionLabel::count())];
            let c = citing(&mut rng, lexicon, shape, label.index());
            let mut inst = FunctionInstance::new(format!("fn-{i}"), c.tokens.join(" "), label);
            inst.citing_paper_id = format!("citing-{}", i / 4);
            inst.cited_paper_id = format!("cited-{i}");
            inst
        })
        .collect()
}

fn fragment<R: Rng>(rng: &mut R, lexicon: &Lexicon, shared: &[String], filler: (usize, usize)) -> String {
    let len = rng.random_range(filler.0..=filler.1);
    let mut tokens = lexicon.filler_run(rng, len);
    tokens.extend(shared.iter().cloned());
    tokens.shuffle(rng);
    tokens.join(" ")
}

/// `n` (citing sentence, fragment) pairs, alternating Prov and NonProv. A
/// Prov fragment repeats two or three of the citing sentence's planted
/// content words inside filler; a NonProv fragment is filler only. With a
/// small filler vocabulary both kinds share several filler words with the
/// citing sentence, so raw overlap counts are noisy.
pub fn provenance_corpus(lexicon: &Lexicon, shape: SentenceShape, n: usize, seed: u64) -> Vec<ProvenanceInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let class = rng.random_range(0..FunctionLabel::count());
            let c = citing(&mut rng, lexicon, shape, class);
            let label = if i % 2 == 0 {
                ProvenanceLabel::Prov
            } else {
                ProvenanceLabel::NonProv
            };
            let fragment = match label {
                ProvenanceLabel::Prov => {
                    let k = rng.random_range(2..=c.content.len().clamp(2, 3));
                    let shared: Vec<String> = c.content.choose_multiple(&mut rng, k).cloned().collect();
                    fragment(&mut rng, lexicon, &shared, (8, 14))
                }
                ProvenanceLabel::NonProv => fragment(&mut rng, lexicon, &[], (10, 17)),
            };
            ProvenanceInstance {
                id: format!("pv-{i}"),
                citing_sentence: c.tokens.join(" "),
                context_prev: String::new(),
                context_next: String::new(),
                fragment,
                label,
                cited_paper_id: format!("cited-{}", i / 5),
            }
        })
        .collect()
}

/// A function corpus and a provenance corpus whose citing sentences come
/// from the same generator, so a shared citing-sentence encoder sees one
/// distribution from both tasks.
pub fn linked_corpora(
    lexicon: &Lexicon,
    shape: SentenceShape,
    functions: usize,
    pairs: usize,
    seed: u64,
) -> (Vec<FunctionInstance>, Vec<ProvenanceInstance>) {
    (
        function_corpus(lexicon, shape, functions, derive_seed(seed, 1)),
        provenance_corpus(lexicon, shape, pairs, derive_seed(seed, 2)),
    )
}

/// Class counts of the shipped function fixture, in label order.
pub const FIXTURE_FUNCTION_COUNTS: [usize; 4] = [31, 95, 295, 1011];
pub const FIXTURE_ANNOTATIONS: usize = 608;
pub const FIXTURE_CITED_PAPERS: usize = 295;

const AUTHORS: [&str; 12] = [
    "Ahn", "Baker", "Chen", "Dunn", "Evans", "Fujita", "Garcia", "Hale", "Ito", "Jensen", "Kumar", "Lopez",
];

fn author_set<R: Rng>(rng: &mut R) -> Vec<String> {
    let k = rng.random_range(1..=3);
    AUTHORS.choose_multiple(rng, k).map(|a| a.to_string()).collect()
}

fn marker<R: Rng>(rng: &mut R, year: i32) -> String {
    let a = AUTHORS.choose(rng).expect("authors");
    match rng.random_range(0..3) {
        0 => format!("({a}, {year})"),
        1 => format!("({a} et al., {year})"),
        _ => format!("[{year}]"),
    }
}

/// A function corpus with exactly [`FIXTURE_FUNCTION_COUNTS`] instances per
/// class and every metadata field populated.
pub fn fixture_function_corpus(seed: u64) -> Vec<FunctionInstance> {
    let lexicon = Lexicon::new(120, 400, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<FunctionLabel> = FIXTURE_FUNCTION_COUNTS
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(FunctionLabel::ALL[c], n))
        .collect();
    labels.shuffle(&mut rng);
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let shape = SentenceShape::default();
            let citing_year = rng.random_range(1995..=2016);
            let cited_year = citing_year - rng.random_range(-1..=15);
            let mut sentence = citing(&mut rng, &lexicon, shape, label.index()).tokens;
            let at = rng.random_range(0..=sentence.len());
            sentence.insert(at, marker(&mut rng, cited_year));
            let prev = lexicon.filler_run(&mut rng, 10).join(" ") + ".";
            let next = lexicon.filler_run(&mut rng, 9).join(" ") + ".";
            let total = rng.random_range(3000..9000u64);
            let mut inst = FunctionInstance::new(format!("f{i:04}"), sentence.join(" ") + ".", label);
            inst.context_prev = prev;
            inst.context_next = next;
            inst.citing_paper_id = format!("P{:03}", i / 5);
            inst.cited_paper_id = format!("C{:04}", rng.random_range(0..900));
            inst.citing_year = Some(citing_year);
            inst.cited_year = Some(cited_year);
            inst.citing_authors = Some(author_set(&mut rng).into_iter().map(|a| a.to_lowercase()).collect());
            inst.cited_authors = Some(author_set(&mut rng).into_iter().map(|a| a.to_lowercase()).collect());
            inst.words_before_citing = Some(rng.random_range(0..total));
            inst.total_words_in_paper = Some(total);
            inst.cited_paper_mention_count = Some(rng.random_range(1..6));
            inst.same_author_citation_count = Some(rng.random_range(0..4));
            inst
        })
        .collect()
}

/// Annotations and cited-paper texts for the provenance fixture:
/// [`FIXTURE_ANNOTATIONS`] annotations over [`FIXTURE_CITED_PAPERS`]
/// papers, every paper keeping at least three unannotated sentences so
/// three negatives can be drawn from each.
pub fn fixture_provenance(seed: u64) -> (Vec<ProvenanceAnnotation>, BTreeMap<String, PaperRecord>) {
    let lexicon = Lexicon::new(120, 400, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extra = FIXTURE_ANNOTATIONS - 2 * FIXTURE_CITED_PAPERS;
    let mut per_paper: Vec<usize> = (0..FIXTURE_CITED_PAPERS)
        .map(|p| if p < extra { 3 } else { 2 })
        .collect();
    per_paper.shuffle(&mut rng);
    let mut annotations = Vec::new();
    let mut papers = BTreeMap::new();
    for (p, &count) in per_paper.iter().enumerate() {
        let paper_id = format!("C{p:04}");
        let sentences = count + rng.random_range(3..=6);
        let mut lines: Vec<String> = (0..sentences)
            .map(|_| {
                let len = rng.random_range(9..18);
                lexicon.filler_run(&mut rng, len).join(" ") + "."
            })
            .collect();
        let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, sentences, count).into_vec();
        chosen.sort_unstable();
        for (a, &idx) in chosen.iter().enumerate() {
            let class = rng.random_range(0..FunctionLabel::count());
            let c = citing(&mut rng, &lexicon, SentenceShape::default(), class);
            let shared: Vec<String> = c.content.iter().take(2).cloned().collect();
            let mut frag = tokenize(&lines[idx]);
            frag.extend(shared);
            frag.shuffle(&mut rng);
            lines[idx] = frag.join(" ") + ".";
            annotations.push(ProvenanceAnnotation {
                id: format!("{paper_id}-a{a}"),
                citing_paper_id: format!("P{:03}", rng.random_range(0..300)),
                cited_paper_id: paper_id.clone(),
                citing_sentence: c.tokens.join(" ") + ".",
                context_prev: String::new(),
                context_next: String::new(),
                fragment_sentence_indices: vec![idx],
            });
        }
        papers.insert(paper_id.clone(), PaperRecord::from_lines(paper_id, lines));
    }
    (annotations, papers)
}

/// Distinct words across `texts`, for building embedding tables that cover
/// an arbitrary corpus.
pub fn corpus_words<'a>(texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    texts.into_iter().flat_map(tokenize).collect()
}

/// Random embeddings for an arbitrary word set.
pub fn embeddings_for(words: &BTreeSet<String>, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.5).expect("valid deviation");
    let mut table = EmbeddingTable::new(dim);
    for w in words {
        table
            .insert(w.clone(), (0..dim).map(|_| normal.sample(&mut rng)).collect())
            .expect("dimension matches");
    }
    table
}
