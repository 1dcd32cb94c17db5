use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{normalize_author, FunctionInstance, FunctionLabel, PaperRecord, ProvenanceInstance, ProvenanceLabel};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct FunctionRecord {
    id: String,
    citing_sentence: String,
    #[serde(default)]
    context_prev: String,
    #[serde(default)]
    context_next: String,
    label: String,
    #[serde(default)]
    citing_paper_id: String,
    #[serde(default)]
    cited_paper_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    citing_year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cited_year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    citing_authors: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cited_authors: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    words_before_citing: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total_words_in_paper: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cited_paper_mention_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    same_author_citation_count: Option<u64>,
}

fn authors(names: Option<Vec<String>>) -> Option<BTreeSet<String>> {
    names.map(|v| v.iter().map(|n| normalize_author(n)).collect())
}

impl FunctionRecord {
    fn into_instance(self) -> Result<FunctionInstance> {
        let label: FunctionLabel = self.label.parse()?;
        let inst = FunctionInstance {
            id: self.id,
            citing_sentence: self.citing_sentence,
            context_prev: self.context_prev,
            context_next: self.context_next,
            label,
            citing_paper_id: self.citing_paper_id,
            cited_paper_id: self.cited_paper_id,
            citing_year: self.citing_year,
            cited_year: self.cited_year,
            citing_authors: authors(self.citing_authors),
            cited_authors: authors(self.cited_authors),
            words_before_citing: self.words_before_citing,
            total_words_in_paper: self.total_words_in_paper,
            cited_paper_mention_count: self.cited_paper_mention_count,
            same_author_citation_count: self.same_author_citation_count,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn from_instance(inst: &FunctionInstance) -> Self {
        Self {
            id: inst.id.clone(),
            citing_sentence: inst.citing_sentence.clone(),
            context_prev: inst.context_prev.clone(),
            context_next: inst.context_next.clone(),
            label: inst.label.to_string(),
            citing_paper_id: inst.citing_paper_id.clone(),
            cited_paper_id: inst.cited_paper_id.clone(),
            citing_year: inst.citing_year,
            cited_year: inst.cited_year,
            citing_authors: inst.citing_authors.as_ref().map(|s| s.iter().cloned().collect()),
            cited_authors: inst.cited_authors.as_ref().map(|s| s.iter().cloned().collect()),
            words_before_citing: inst.words_before_citing,
            total_words_in_paper: inst.total_words_in_paper,
            cited_paper_mention_count: inst.cited_paper_mention_count,
            same_author_citation_count: inst.same_author_citation_count,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProvenanceRecord {
    id: String,
    citing_sentence: String,
    #[serde(default)]
    context_prev: String,
    #[serde(default)]
    context_next: String,
    fragment: String,
    label: String,
    cited_paper_id: String,
}

/// One CL-SciSumm style positive: a citation and the sentences of the cited
/// paper that carry the cited information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceAnnotation {
    pub id: String,
    #[serde(default)]
    pub citing_paper_id: String,
    pub cited_paper_id: String,
    pub citing_sentence: String,
    #[serde(default)]
    pub context_prev: String,
    #[serde(default)]
    pub context_next: String,
    pub fragment_sentence_indices: Vec<usize>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses each non-blank line with `convert`; errors carry the 1-based line number.
fn read_jsonl<R, T>(path: &Path, mut convert: impl FnMut(R) -> Result<T>) -> Result<Vec<T>>
where
    R: DeserializeOwned,
{
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let record: R = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        out.push(convert(record).map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, &r)?;
        buf.push(b'\n');
    }
    crate::util::write_atomic(path, &buf)
}

pub fn load_function_corpus(path: impl AsRef<Path>) -> Result<Vec<FunctionInstance>> {
    read_jsonl(path.as_ref(), FunctionRecord::into_instance)
}

pub fn save_function_corpus(path: impl AsRef<Path>, instances: &[FunctionInstance]) -> Result<()> {
    write_jsonl(path.as_ref(), instances.iter().map(FunctionRecord::from_instance))
}

/// Loads a materialized provenance dataset (positives and sampled negatives).
pub fn load_provenance_corpus(path: impl AsRef<Path>) -> Result<Vec<ProvenanceInstance>> {
    read_jsonl(path.as_ref(), |r: ProvenanceRecord| {
        let inst = ProvenanceInstance {
            label: r.label.parse::<ProvenanceLabel>()?,
            id: r.id,
            citing_sentence: r.citing_sentence,
            context_prev: r.context_prev,
            context_next: r.context_next,
            fragment: r.fragment,
            cited_paper_id: r.cited_paper_id,
        };
        inst.validate()?;
        Ok(inst)
    })
}

pub fn save_provenance_corpus(path: impl AsRef<Path>, instances: &[ProvenanceInstance]) -> Result<()> {
    write_jsonl(
        path.as_ref(),
        instances.iter().map(|i| ProvenanceRecord {
            id: i.id.clone(),
            citing_sentence: i.citing_sentence.clone(),
            context_prev: i.context_prev.clone(),
            context_next: i.context_next.clone(),
            fragment: i.fragment.clone(),
            label: i.label.to_string(),
            cited_paper_id: i.cited_paper_id.clone(),
        }),
    )
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<ProvenanceAnnotation>> {
    read_jsonl(path.as_ref(), Ok)
}

/// Reads a one-sentence-per-line paper; the 0-based line number is the
/// sentence index.
pub fn load_paper(paper_id: &str, path: impl AsRef<Path>) -> Result<PaperRecord> {
    let text = read_to_string(path.as_ref())?;
    Ok(PaperRecord::from_lines(paper_id, text.lines()))
}

/// Loads every `<paper_id>.txt` in `dir`.
pub fn load_papers_dir(dir: impl AsRef<Path>) -> Result<BTreeMap<String, PaperRecord>> {
    let dir = dir.as_ref();
    let mut papers = BTreeMap::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        papers.insert(id.to_string(), load_paper(id, &path)?);
    }
    Ok(papers)
}

/// Turns annotations into `Prov` instances, joining multi-sentence spans
/// with a single space.
pub fn materialize_annotations(
    annotations: &[ProvenanceAnnotation],
    papers: &BTreeMap<String, PaperRecord>,
) -> Result<Vec<ProvenanceInstance>> {
    annotations
        .iter()
        .map(|a| {
            let paper = papers
                .get(&a.cited_paper_id)
                .ok_or_else(|| Error::DanglingReference(format!("annotation {}: paper {}", a.id, a.cited_paper_id)))?;
            if a.fragment_sentence_indices.is_empty() {
                return Err(Error::invalid(format!("annotation {}: no fragment sentences", a.id)));
            }
            let parts = a
                .fragment_sentence_indices
                .iter()
                .map(|&i| {
                    paper.sentence(i).ok_or_else(|| {
                        Error::DanglingReference(format!(
                            "annotation {}: sentence {i} of paper {}",
                            a.id, a.cited_paper_id
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let inst = ProvenanceInstance {
                id: a.id.clone(),
                citing_sentence: a.citing_sentence.clone(),
                context_prev: a.context_prev.clone(),
                context_next: a.context_next.clone(),
                fragment: parts.join(" "),
                label: ProvenanceLabel::Prov,
                cited_paper_id: a.cited_paper_id.clone(),
            };
            inst.validate()?;
            Ok(inst)
        })
        .collect()
}

pub fn load_provenance_annotations(
    path: impl AsRef<Path>,
    papers: &BTreeMap<String, PaperRecord>,
) -> Result<Vec<ProvenanceInstance>> {
    materialize_annotations(&load_annotations(path)?, papers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const LINE: &str = r#"{"id":"f1","citing_sentence":"We use X (Smith, 2000).","context_prev":"a","context_next":"b","label":"Pos","citing_paper_id":"C1","cited_paper_id":"D1","citing_year":2010,"cited_year":2000,"citing_authors":["Ann Lee"],"cited_authors":["Bo Smith"],"words_before_citing":10,"total_words_in_paper":100,"cited_paper_mention_count":2,"same_author_citation_count":0}"#;

    #[test]
    fn loads_full_record() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "f.jsonl", &format!("{LINE}\n"));
        let v = load_function_corpus(&p).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].label, FunctionLabel::Pos);
        assert_eq!(v[0].citation_context(), ["a", "We use X (Smith, 2000).", "b"]);
        assert!(v[0].cited_authors.as_ref().unwrap().contains("bo smith"));
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "f.jsonl", "");
        assert!(load_function_corpus(&p).unwrap().is_empty());
    }

    #[test]
    fn unknown_label_reports_line_and_value() {
        let dir = TempDir::new().unwrap();
        let bad = LINE.replace("\"Pos\"", "\"Positive\"");
        let p = write(&dir, "f.jsonl", &format!("{LINE}\n{bad}\n"));
        let err = load_function_corpus(&p).unwrap_err();
        match &err {
            Error::Parse { line, message, .. } => {
                assert_eq!(*line, 2);
                assert!(message.contains("Positive"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "f.jsonl", &format!("{LINE}\n{LINE}\n{{not json\n"));
        assert!(matches!(load_function_corpus(&p), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn absent_metadata_is_unknown() {
        let dir = TempDir::new().unwrap();
        let p = write(&dir, "f.jsonl", r#"{"id":"x","citing_sentence":"s","label":"Neut"}"#);
        let v = load_function_corpus(&p).unwrap();
        assert_eq!(v[0].citing_year, None);
        assert_eq!(v[0].citing_authors, None);
        assert_eq!(v[0].context_prev, "");
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_function_corpus("/nonexistent/missing.jsonl").unwrap_err();
        assert!(err.to_string().contains("missing.jsonl"));
    }

    fn papers() -> BTreeMap<String, PaperRecord> {
        let mut m = BTreeMap::new();
        let lines: Vec<String> = (0..10).map(|i| format!("sentence {i}")).collect();
        m.insert("P1".to_string(), PaperRecord::from_lines("P1", lines));
        m
    }

    fn annotation(paper: &str, idx: Vec<usize>) -> ProvenanceAnnotation {
        ProvenanceAnnotation {
            id: "a1".into(),
            citing_paper_id: "C".into(),
            cited_paper_id: paper.into(),
            citing_sentence: "cite".into(),
            context_prev: String::new(),
            context_next: String::new(),
            fragment_sentence_indices: idx,
        }
    }

    #[test]
    fn materializes_single_sentence() {
        let v = materialize_annotations(&[annotation("P1", vec![7])], &papers()).unwrap();
        assert_eq!(v[0].fragment, "sentence 7");
        assert_eq!(v[0].label, ProvenanceLabel::Prov);
    }

    #[test]
    fn joins_spans_with_single_space() {
        let v = materialize_annotations(&[annotation("P1", vec![7, 8])], &papers()).unwrap();
        assert_eq!(v[0].fragment, "sentence 7 sentence 8");
    }

    #[test]
    fn dangling_paper_is_named() {
        let err = materialize_annotations(&[annotation("PX", vec![1])], &papers()).unwrap_err();
        assert!(err.to_string().contains("PX"));
        let err = materialize_annotations(&[annotation("P1", vec![42])], &papers()).unwrap_err();
        assert!(err.to_string().contains("42"));
    }

    #[test]
    fn papers_dir_uses_line_numbers() {
        let dir = TempDir::new().unwrap();
        write(&dir, "P9.txt", "first\nsecond\n");
        write(&dir, "notes.md", "ignored");
        let papers = load_papers_dir(dir.path()).unwrap();
        assert_eq!(papers.len(), 1);
        assert_eq!(papers["P9"].sentence(1), Some("second"));
    }
}
