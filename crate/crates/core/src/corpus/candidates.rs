use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::text::tokenize;

/// Absolute sentiment score at or above which a sentence is a candidate.
pub const DEFAULT_SENTIMENT_CUTOFF: f64 = 0.6;

/// Phrases that flag likely minority-class citations.
#[derive(Debug, Clone, PartialEq)]
pub struct CuePhraseTable {
    pub coco_cues: Vec<String>,
    pub pos_cues: Vec<String>,
}

impl Default for CuePhraseTable {
    fn default() -> Self {
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        Self {
            coco_cues: own(&["Contrast", "Comparable", "Similar to"]),
            pos_cues: own(&[
                "We use",
                "We have used",
                "We adopt",
                "We have adopted",
                "I use",
                "I have used",
                "I adopt",
                "I have adopted",
                "We follow",
                "I follow",
            ]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CandidateReason {
    Valence,
    CueCoCo,
    CuePos,
}

impl fmt::Display for CandidateReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Valence => "valence",
            Self::CueCoCo => "cue:CoCo",
            Self::CuePos => "cue:Pos",
        })
    }
}

impl Serialize for CandidateReason {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedCandidate {
    pub text: String,
    pub score: f64,
    pub reasons: Vec<CandidateReason>,
}

/// Maps a sentence to a sentiment score in [-1, 1].
pub trait SentimentScorer {
    fn score(&self, text: &str) -> f64;
}

/// Mean valence of the lexicon words found in a sentence (0 when none are).
#[derive(Debug, Clone)]
pub struct LexiconScorer {
    valence: HashMap<String, f64>,
}

const VALENCE: &[(&str, f64)] = &[
    ("excellent", 0.9),
    ("outstanding", 0.9),
    ("superior", 0.8),
    ("impressive", 0.8),
    ("successful", 0.7),
    ("effective", 0.7),
    ("robust", 0.6),
    ("accurate", 0.6),
    ("elegant", 0.7),
    ("promising", 0.6),
    ("useful", 0.5),
    ("good", 0.5),
    ("improves", 0.5),
    ("better", 0.4),
    ("popular", 0.3),
    ("interesting", 0.3),
    ("fails", -0.8),
    ("failure", -0.8),
    ("badly", -0.8),
    ("poor", -0.7),
    ("poorly", -0.7),
    ("wrong", -0.7),
    ("flawed", -0.8),
    ("unable", -0.6),
    ("inadequate", -0.7),
    ("problematic", -0.6),
    ("suffers", -0.6),
    ("limited", -0.4),
    ("lacks", -0.5),
    ("restricts", -0.4),
    ("expensive", -0.3),
    ("difficult", -0.3),
    ("errors", -0.3),
];

impl Default for LexiconScorer {
    fn default() -> Self {
        Self::new(VALENCE.iter().map(|(w, v)| (w.to_string(), *v)))
    }
}

impl LexiconScorer {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        Self {
            valence: entries
                .into_iter()
                .map(|(w, v)| (w.to_lowercase(), v.clamp(-1.0, 1.0)))
                .collect(),
        }
    }
}

impl SentimentScorer for LexiconScorer {
    fn score(&self, text: &str) -> f64 {
        let hits: Vec<f64> = tokenize(text)
            .iter()
            .filter_map(|t| self.valence.get(t).copied())
            .collect();
        if hits.is_empty() {
            0.0
        } else {
            hits.iter().sum::<f64>() / hits.len() as f64
        }
    }
}

/// Keeps sentences with strong valence or a cue phrase (case-insensitive
/// substring match). A sentence matching several criteria is listed once
/// with every reason.
pub fn select_candidates(
    sentences: &[(String, f64)],
    cues: &CuePhraseTable,
    cutoff: f64,
) -> Result<Vec<SelectedCandidate>> {
    let lower = |v: &[String]| v.iter().map(|c| c.to_lowercase()).collect::<Vec<_>>();
    let coco = lower(&cues.coco_cues);
    let pos = lower(&cues.pos_cues);
    let mut out = Vec::new();
    for (text, score) in sentences {
        if !(-1.0..=1.0).contains(score) {
            return Err(Error::invalid(format!("sentiment score {score} outside [-1, 1]")));
        }
        let hay = text.to_lowercase();
        let mut reasons = Vec::new();
        if score.abs() >= cutoff {
            reasons.push(CandidateReason::Valence);
        }
        if coco.iter().any(|c| hay.contains(c.as_str())) {
            reasons.push(CandidateReason::CueCoCo);
        }
        if pos.iter().any(|c| hay.contains(c.as_str())) {
            reasons.push(CandidateReason::CuePos);
        }
        if !reasons.is_empty() {
            out.push(SelectedCandidate {
                text: text.clone(),
                score: *score,
                reasons,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one(text: &str, score: f64) -> Vec<SelectedCandidate> {
        select_candidates(
            &[(text.to_string(), score)],
            &CuePhraseTable::default(),
            DEFAULT_SENTIMENT_CUTOFF,
        )
        .unwrap()
    }

    #[test]
    fn strong_negative_valence() {
        let v = one("This approach fails badly", -0.7);
        assert_eq!(v[0].reasons, vec![CandidateReason::Valence]);
    }

    #[test]
    fn coco_cue() {
        let v = one("Similar to (Smith, 2000), we parse trees", 0.0);
        assert_eq!(v[0].reasons, vec![CandidateReason::CueCoCo]);
        assert_eq!(v[0].reasons[0].to_string(), "cue:CoCo");
    }

    #[test]
    fn neither() {
        assert!(one("The sky is blue", 0.1).is_empty());
    }

    #[test]
    fn cues_match_mid_sentence_and_combine() {
        let v = one("In this work we use the parser and contrast it", 0.65);
        assert_eq!(
            v[0].reasons,
            vec![
                CandidateReason::Valence,
                CandidateReason::CueCoCo,
                CandidateReason::CuePos
            ]
        );
    }

    #[test]
    fn cutoff_is_inclusive() {
        assert_eq!(one("plain", 0.6).len(), 1);
        assert_eq!(one("plain", -0.6).len(), 1);
        assert!(one("plain", 0.59).is_empty());
    }

    #[test]
    fn out_of_range_score() {
        let r = select_candidates(&[("x".into(), 1.5)], &CuePhraseTable::default(), 0.6);
        assert!(r.is_err());
    }

    #[test]
    fn default_cue_lists() {
        let t = CuePhraseTable::default();
        assert_eq!(t.coco_cues.len(), 3);
        assert_eq!(t.pos_cues.len(), 10);
        assert_eq!(t.pos_cues[3], "We have adopted");
    }

    #[test]
    fn lexicon_scores() {
        let s = LexiconScorer::default();
        assert!(s.score("This approach fails badly") <= -0.6);
        assert_eq!(s.score("The sky is blue"), 0.0);
        assert!(s.score("an excellent and robust method") > 0.6);
    }

    proptest! {
        #[test]
        fn valence_selection_is_monotone(s in -1.0f64..=1.0, bump in 0.0f64..1.0) {
            let stronger = (s.abs() + bump).min(1.0) * if s < 0.0 { -1.0 } else { 1.0 };
            if !one("neutral words only", s).is_empty() {
                prop_assert!(!one("neutral words only", stronger).is_empty());
            }
        }
    }
}
