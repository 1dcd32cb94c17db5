//! Tokenization, vocabulary, padding and embedding lookup.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Embedding dimension of the GloVe vectors the models are built around.
pub const DEFAULT_EMBEDDING_DIM: usize = 100;

/// Upper bound on the padded sequence length of any input slot.
pub const MAX_SEQUENCE_LENGTH: usize = 100;

/// Lowercases and splits on every character that is neither a letter nor a
/// digit. A period with a digit on both sides stays inside its token, so
/// decimals such as `21.96` survive.
pub fn tokenize(raw: &str) -> Vec<String> {
    let chars: Vec<char> = raw.chars().collect();
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if c == '.'
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
            && !cur.is_empty()
        {
            cur.push('.');
        } else if !cur.is_empty() {
            tokens.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Word to index map; index 0 is reserved for padding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    words: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct VocabEntry {
    word: String,
    index: usize,
}

impl Vocabulary {
    /// Builds from an explicit word list; indices follow list order from 1.
    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::invalid("vocabulary words must be non-empty"));
            }
            if index.insert(w.clone(), i + 1).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Self { index, words })
    }

    /// Number of words, excluding padding.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Word at `index`; `None` for padding or out of range.
    pub fn word(&self, index: usize) -> Option<&str> {
        index.checked_sub(1).and_then(|i| self.words.get(i)).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            let entry = VocabEntry {
                word: w.clone(),
                index: i + 1,
            };
            out.push_str(&serde_json::to_string(&entry).expect("vocab entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut words = Vec::new();
        for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let entry: VocabEntry = serde_json::from_str(line)?;
            if entry.index != words.len() + 1 {
                return Err(Error::invalid(format!(
                    "vocabulary line {}: expected index {}, found {}",
                    line_no + 1,
                    words.len() + 1,
                    entry.index
                )));
            }
            words.push(entry.word);
        }
        Self::from_words(words)
    }
}

/// Vocabulary of every distinct token, indexed in lexicographic order.
pub fn build_vocab<I, T, S>(corpora: I) -> Vocabulary
where
    I: IntoIterator<Item = T>,
    T: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let set: BTreeSet<String> = corpora
        .into_iter()
        .flatten()
        .map(|s| s.as_ref().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    Vocabulary::from_words(set.into_iter().collect()).expect("distinct non-empty words")
}

/// A right-padded index sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSequence {
    pub indices: Vec<usize>,
    pub true_length: usize,
}

/// Maps tokens to indices (unknown tokens become 0), truncates to `w` and
/// right-pads with 0.
pub fn encode_pad<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary, w: usize) -> Result<EncodedSequence> {
    if w == 0 {
        return Err(Error::invalid("padded length must be at least 1"));
    }
    let mut indices: Vec<usize> = tokens
        .iter()
        .take(w)
        .map(|t| vocab.get(t.as_ref()).unwrap_or(0))
        .collect();
    let true_length = indices.len();
    indices.resize(w, 0);
    Ok(EncodedSequence { indices, true_length })
}

/// Padded length for one input slot: the longest training sequence, capped
/// at [`MAX_SEQUENCE_LENGTH`] and never below `min_len`.
pub fn padded_length<T: AsRef<[String]>>(sequences: &[T], min_len: usize) -> usize {
    sequences
        .iter()
        .map(|s| s.as_ref().len())
        .max()
        .unwrap_or(0)
        .min(MAX_SEQUENCE_LENGTH)
        .max(min_len)
        .max(1)
}

/// Treatment of words missing from an [`EmbeddingTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Fixed all-zero vector.
    #[default]
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    pub oov: OovPolicy,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
            oov: OovPolicy::Zero,
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::shape(format!(
                "embedding of length {} in a table of dim {}",
                vector.len(),
                self.dim
            )));
        }
        self.vectors.insert(word.into(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Keeps only the rows for `vocab`, as a `(V + 1) × dim` matrix whose row 0
    /// (padding) and OOV rows are zero.
    pub fn rows_for(&self, vocab: &Vocabulary) -> Array2<f64> {
        let mut m = Array2::zeros((vocab.len() + 1, self.dim));
        for (i, w) in vocab.words().iter().enumerate() {
            if let Some(v) = self.get(w) {
                m.row_mut(i + 1).assign(&ndarray::ArrayView1::from(v));
            }
        }
        m
    }

    /// Rebuilds a table from a `(V + 1) × dim` row matrix, skipping zero rows.
    pub fn from_rows(vocab: &Vocabulary, rows: &Array2<f64>) -> Result<Self> {
        if rows.nrows() != vocab.len() + 1 {
            return Err(Error::shape(format!(
                "{} embedding rows for a vocabulary of {}",
                rows.nrows(),
                vocab.len()
            )));
        }
        let mut t = Self::new(rows.ncols());
        for (i, w) in vocab.words().iter().enumerate() {
            let row = rows.row(i + 1);
            if row.iter().any(|&x| x != 0.0) {
                t.insert(w.clone(), row.to_vec())?;
            }
        }
        Ok(t)
    }
}

/// Parses a GloVe text file: each line is a word followed by `expected_dim`
/// whitespace-separated values.
pub fn load_embeddings(path: impl AsRef<Path>, expected_dim: usize) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table = EmbeddingTable::new(expected_dim);
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let values = parts
            .map(|v| v.parse::<f64>().map_err(|e| parse_err(format!("{v:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != expected_dim {
            return Err(parse_err(format!(
                "expected {expected_dim} values, found {}",
                values.len()
            )));
        }
        table.vectors.entry(word.to_string()).or_insert(values);
    }
    Ok(table)
}

/// Writes `table` in the text format read by [`load_embeddings`], words sorted.
pub fn save_embeddings(path: impl AsRef<Path>, table: &EmbeddingTable) -> Result<()> {
    let mut words: Vec<&String> = table.vectors.keys().collect();
    words.sort();
    let mut out = String::new();
    for w in words {
        out.push_str(w);
        for v in &table.vectors[w] {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    crate::util::write_atomic(path.as_ref(), out.as_bytes())
}

/// A `dim × w` embedded sequence, one column per position.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceMatrix(pub Array2<f64>);

impl SequenceMatrix {
    pub fn zeros(dim: usize, w: usize) -> Self {
        Self(Array2::zeros((dim, w)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn width(&self) -> usize {
        self.0.ncols()
    }
}

/// Column `j` is the vector of the word at position `j`; padding and words
/// without a vector give zero columns.
pub fn embed_sequence(seq: &EncodedSequence, vocab: &Vocabulary, table: &EmbeddingTable) -> SequenceMatrix {
    let mut m = SequenceMatrix::zeros(table.dim(), seq.indices.len());
    for (j, &idx) in seq.indices.iter().enumerate() {
        if let Some(v) = vocab.word(idx).and_then(|w| table.get(w)) {
            m.0.column_mut(j).assign(&ndarray::ArrayView1::from(v));
        }
    }
    m
}

/// Counts of each token, in token order.
pub fn term_counts(tokens: &[String]) -> BTreeMap<&str, usize> {
    let mut m = BTreeMap::new();
    for t in tokens {
        *m.entry(t.as_str()).or_insert(0) += 1;
    }
    m
}
