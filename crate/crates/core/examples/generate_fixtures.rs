//! Regenerates the files under `tests/fixtures`.
//!
//! `cargo run --example generate_fixtures -- crates/core/tests/fixtures`

use std::path::PathBuf;

use citescope::corpus::{save_function_corpus, save_provenance_corpus};
use citescope::synthetic::{
    corpus_words, embeddings_for, fixture_function_corpus, fixture_provenance, linked_corpora, Lexicon, SentenceShape,
};
use citescope::text::save_embeddings;

const SEED: u64 = 5;

fn main() -> citescope::Result<()> {
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("crates/core/tests/fixtures"));
    let papers_dir = out.join("papers");

    let function = fixture_function_corpus(SEED);
    save_function_corpus(out.join("function.jsonl"), &function)?;

    let (annotations, papers) = fixture_provenance(SEED);
    let mut lines = String::new();
    for a in &annotations {
        lines.push_str(&serde_json::to_string(a)?);
        lines.push('\n');
    }
    citescope::util::write_atomic(&out.join("annotations.jsonl"), lines.as_bytes())?;
    for (id, paper) in &papers {
        let body: String = paper.sentences().iter().map(|(_, s)| format!("{s}\n")).collect();
        citescope::util::write_atomic(&papers_dir.join(format!("{id}.txt")), body.as_bytes())?;
    }

    // Small linked corpora plus 16-d vectors keep CLI tests fast.
    let (small_f, small_p) = linked_corpora(&Lexicon::default(), SentenceShape::default(), 120, 100, SEED);
    save_function_corpus(out.join("small_function.jsonl"), &small_f)?;
    save_provenance_corpus(out.join("small_provenance.jsonl"), &small_p)?;

    let texts = function
        .iter()
        .map(|i| i.citing_sentence.as_str())
        .chain(annotations.iter().map(|a| a.citing_sentence.as_str()))
        .chain(
            papers
                .values()
                .flat_map(|p| p.sentences().iter().map(|(_, s)| s.as_str())),
        )
        .chain(small_f.iter().map(|i| i.citing_sentence.as_str()))
        .chain(
            small_p
                .iter()
                .flat_map(|i| [i.citing_sentence.as_str(), i.fragment.as_str()]),
        );
    save_embeddings(
        out.join("embeddings16.txt"),
        &embeddings_for(&corpus_words(texts), 16, SEED),
    )?;
    Ok(())
}
