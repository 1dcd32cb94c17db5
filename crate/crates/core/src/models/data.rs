use super::{FunctionExample, ProvenanceExample};
use crate::corpus::{FunctionInstance, ProvenanceInstance};
use crate::error::Result;
use crate::text::{
    build_vocab, embed_sequence, encode_pad, padded_length, tokenize, EmbeddingTable, SequenceMatrix, Vocabulary,
};

/// Turns citing sentences and fragments into fixed-width embedded matrices.
///
/// Each input slot gets its own padded width: the longest training sequence
/// for that slot, capped at 100 tokens and never shorter than the
/// convolution window.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurizer {
    pub vocab: Vocabulary,
    /// Embeddings restricted to `vocab`.
    pub table: EmbeddingTable,
    pub citing_width: usize,
    pub fragment_width: usize,
}

impl Featurizer {
    /// Vocabulary over `vocab_texts` (label-free, so test text may be
    /// included); slot widths from the training texts only.
    pub fn fit<'a>(
        table: &EmbeddingTable,
        vocab_texts: impl IntoIterator<Item = &'a str>,
        citing_train: &[&str],
        fragment_train: &[&str],
        window: usize,
    ) -> Result<Self> {
        let vocab = build_vocab(vocab_texts.into_iter().map(tokenize));
        let restricted = EmbeddingTable::from_rows(&vocab, &table.rows_for(&vocab))?;
        let width = |texts: &[&str]| {
            let toks: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
            padded_length(&toks, window)
        };
        Ok(Self {
            citing_width: width(citing_train),
            fragment_width: width(fragment_train),
            vocab,
            table: restricted,
        })
    }

    fn embed(&self, text: &str, width: usize) -> SequenceMatrix {
        let seq = encode_pad(&tokenize(text), &self.vocab, width).expect("widths are positive");
        embed_sequence(&seq, &self.vocab, &self.table)
    }

    pub fn embed_citing(&self, text: &str) -> SequenceMatrix {
        self.embed(text, self.citing_width)
    }

    pub fn embed_fragment(&self, text: &str) -> SequenceMatrix {
        self.embed(text, self.fragment_width)
    }

    pub fn function_examples<'a>(
        &self,
        instances: impl IntoIterator<Item = &'a FunctionInstance>,
    ) -> Vec<FunctionExample> {
        instances
            .into_iter()
            .map(|i| FunctionExample {
                citing: self.embed_citing(&i.citing_sentence),
                label: i.label,
            })
            .collect()
    }

    pub fn provenance_examples<'a>(
        &self,
        instances: impl IntoIterator<Item = &'a ProvenanceInstance>,
    ) -> Vec<ProvenanceExample> {
        instances
            .into_iter()
            .map(|i| ProvenanceExample {
                citing: self.embed_citing(&i.citing_sentence),
                fragment: self.embed_fragment(&i.fragment),
                label: i.label,
            })
            .collect()
    }
}
