use serde::{Deserialize, Serialize};

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};

/// Counts indexed `[gold][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let n = classes.len();
        Self {
            classes,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_indices(classes: Vec<String>, gold: &[usize], predicted: &[usize]) -> Result<Self> {
        if gold.len() != predicted.len() {
            return Err(Error::invalid(format!(
                "{} gold labels but {} predictions",
                gold.len(),
                predicted.len()
            )));
        }
        let mut m = Self::new(classes);
        let n = m.classes.len();
        for (&g, &p) in gold.iter().zip(predicted) {
            if g >= n || p >= n {
                return Err(Error::invalid(format!("class index out of range for {n} classes")));
            }
            m.counts[g][p] += 1;
        }
        Ok(m)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|c| self.counts[c][c]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Per-class and support-weighted precision, recall and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub per_class: Vec<ClassScores>,
    pub weighted: Scores,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl PrfReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self> {
        let n = confusion.total();
        if n == 0 {
            return Err(Error::invalid("cannot score an empty prediction set"));
        }
        let mut weighted = Scores::default();
        let per_class: Vec<ClassScores> = (0..confusion.classes.len())
            .map(|c| {
                let tp = confusion.counts[c][c];
                let support = confusion.support(c);
                let precision = ratio(tp, confusion.predicted(c));
                let recall = ratio(tp, support);
                let f1 = f1(precision, recall);
                let w = support as f64 / n as f64;
                weighted.precision += w * precision;
                weighted.recall += w * recall;
                weighted.f1 += w * f1;
                ClassScores {
                    class: confusion.classes[c].clone(),
                    precision,
                    recall,
                    f1,
                    support,
                }
            })
            .collect();
        Ok(Self {
            per_class,
            weighted,
            accuracy: confusion.accuracy(),
            confusion,
        })
    }
}

pub fn weighted_prf_indices(classes: Vec<String>, gold: &[usize], predicted: &[usize]) -> Result<PrfReport> {
    PrfReport::from_confusion(ConfusionMatrix::from_indices(classes, gold, predicted)?)
}

pub fn weighted_prf<L: ClassLabel>(gold: &[L], predicted: &[L]) -> Result<PrfReport> {
    let g: Vec<usize> = gold.iter().map(|l| l.index()).collect();
    let p: Vec<usize> = predicted.iter().map(|l| l.index()).collect();
    weighted_prf_indices(L::names(), &g, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{FunctionLabel, ProvenanceLabel};
    use proptest::prelude::*;
    use ProvenanceLabel::{NonProv as B, Prov as A};

    #[test]
    fn perfect_predictions() {
        let gold = [FunctionLabel::Pos, FunctionLabel::Neut, FunctionLabel::Weak];
        let r = weighted_prf(&gold, &gold).unwrap();
        assert_eq!(
            r.weighted,
            Scores {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0
            }
        );
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn two_class_hand_example() {
        let r = weighted_prf(&[A, A, B, B], &[A, B, B, B]).unwrap();
        let (a, b) = (&r.per_class[0], &r.per_class[1]);
        assert_eq!((a.precision, a.recall), (1.0, 0.5));
        assert!((a.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(b.recall, 1.0);
        assert!((b.f1 - 0.8).abs() < 1e-15);
        assert!((r.weighted.f1 - 0.7333333333333333).abs() < 1e-15);
    }

    #[test]
    fn absent_class_has_zero_weight() {
        let gold = [FunctionLabel::Pos, FunctionLabel::Neut];
        let pred = [FunctionLabel::Pos, FunctionLabel::Pos];
        let r = weighted_prf(&gold, &pred).unwrap();
        assert_eq!(r.per_class[FunctionLabel::Weak as usize].support, 0);
        assert_eq!(r.per_class[FunctionLabel::Weak as usize].f1, 0.0);
        assert!((r.weighted.f1 - 0.5 * (2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs() {
        assert!(weighted_prf::<ProvenanceLabel>(&[], &[]).is_err());
        assert!(weighted_prf(&[A], &[A, B]).is_err());
    }

    #[test]
    fn single_class_gold() {
        let r = weighted_prf(&[A, A, A, A], &[A, B, A, A]).unwrap();
        assert_eq!(r.weighted.recall, r.accuracy);
    }

    proptest! {
        #[test]
        fn weighted_recall_is_accuracy(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..200)) {
            let (g, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let r = weighted_prf_indices(FunctionLabel::names(), &g, &p).unwrap();
            prop_assert!((r.weighted.recall - r.accuracy).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&r.weighted.f1));
        }
    }
}
