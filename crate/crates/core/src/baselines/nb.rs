use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::corpus::ClassLabel;
use crate::error::{Error, Result};
use crate::models::argmax;

pub const DEFAULT_ALPHA: f64 = 1.0;

/// Multinomial naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel<L = crate::corpus::FunctionLabel> {
    /// `ln P(c)`; `-inf` for classes absent from training.
    pub log_priors: Vec<f64>,
    /// `ln P(feature j | c)`, one row per class.
    pub log_likelihoods: Vec<Vec<f64>>,
    pub alpha: f64,
    #[serde(skip)]
    _label: PhantomData<L>,
}

fn check_features(x: &[f64]) -> Result<()> {
    match x.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(&v) => Err(Error::invalid(format!(
            "naive Bayes features must be non-negative and finite, got {v}"
        ))),
        None => Ok(()),
    }
}

impl<L: ClassLabel> NbModel<L> {
    pub fn features(&self) -> usize {
        self.log_likelihoods.first().map_or(0, Vec::len)
    }

    /// Joint log-score of each class for `x`.
    pub fn log_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_features(x)?;
        if x.len() > self.features() {
            return Err(Error::shape(format!(
                "{} features for a model of {}",
                x.len(),
                self.features()
            )));
        }
        Ok(self
            .log_priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(prior, ll)| {
                let evidence: f64 = x.iter().zip(ll).filter(|(v, _)| **v > 0.0).map(|(v, l)| v * l).sum();
                prior + evidence
            })
            .collect())
    }
}

pub fn nb_fit<L: ClassLabel>(features: &[Vec<f64>], labels: &[L], alpha: f64) -> Result<NbModel<L>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "smoothing constant must be positive, got {alpha}"
        )));
    }
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors for {} labels",
            features.len(),
            labels.len()
        )));
    }
    let dim = features[0].len();
    let classes = L::count();
    let mut totals = vec![vec![0.0; dim]; classes];
    let mut docs = vec![0usize; classes];
    for (x, label) in features.iter().zip(labels) {
        if x.len() != dim {
            return Err(Error::shape(format!("feature vectors of length {} and {dim}", x.len())));
        }
        check_features(x)?;
        let c = label.index();
        docs[c] += 1;
        for (t, v) in totals[c].iter_mut().zip(x) {
            *t += v;
        }
    }
    let n = features.len() as f64;
    let log_priors = docs.iter().map(|&d| (d as f64 / n).ln()).collect();
    let log_likelihoods = totals
        .iter()
        .map(|row| {
            let denom = (row.iter().sum::<f64>() + alpha * dim as f64).ln();
            row.iter().map(|t| (t + alpha).ln() - denom).collect()
        })
        .collect();
    Ok(NbModel {
        log_priors,
        log_likelihoods,
        alpha,
        _label: PhantomData,
    })
}

/// Most probable class; ties go to the lowest class index.
pub fn nb_predict<L: ClassLabel>(model: &NbModel<L>, x: &[f64]) -> Result<L> {
    let scores = model.log_scores(x)?;
    Ok(L::from_index(argmax(&scores)).expect("score per class"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{FunctionLabel, ProvenanceLabel};
    use proptest::prelude::*;

    #[test]
    fn hand_computed_likelihoods() {
        // A = Prov, B = NonProv; features (x, y).
        let features = vec![vec![2.0, 1.0], vec![0.0, 2.0]];
        let labels = [ProvenanceLabel::Prov, ProvenanceLabel::NonProv];
        let m = nb_fit(&features, &labels, 1.0).unwrap();
        assert!((m.log_likelihoods[0][0] - (3.0f64 / 5.0).ln()).abs() < 1e-15);
        assert!((m.log_likelihoods[1][0] - (1.0f64 / 4.0).ln()).abs() < 1e-15);
        assert_eq!(m.log_priors[0], m.log_priors[1]);
        assert_eq!(nb_predict(&m, &[1.0, 0.0]).unwrap(), ProvenanceLabel::Prov);
    }

    #[test]
    fn single_class_training_always_predicts_it() {
        let features = vec![vec![1.0, 0.0, 3.0], vec![0.0, 5.0, 1.0]];
        let m = nb_fit(&features, &[FunctionLabel::Pos, FunctionLabel::Pos], 1.0).unwrap();
        for x in [[0.0, 0.0, 0.0], [9.0, 0.0, 0.0], [0.0, 0.0, 7.0]] {
            assert_eq!(nb_predict(&m, &x).unwrap(), FunctionLabel::Pos);
        }
    }

    #[test]
    fn empty_vector_uses_priors() {
        let features = vec![vec![1.0], vec![1.0], vec![4.0]];
        let labels = [FunctionLabel::Neut, FunctionLabel::Neut, FunctionLabel::CoCo];
        let m = nb_fit(&features, &labels, 1.0).unwrap();
        assert_eq!(nb_predict(&m, &[]).unwrap(), FunctionLabel::Neut);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let features = vec![vec![1.0], vec![1.0]];
        let m = nb_fit(&features, &[FunctionLabel::Neut, FunctionLabel::CoCo], 1.0).unwrap();
        assert_eq!(nb_predict(&m, &[2.0]).unwrap(), FunctionLabel::CoCo);
    }

    #[test]
    fn negative_features_are_rejected() {
        assert!(nb_fit(&[vec![-1.0]], &[FunctionLabel::Pos], 1.0).is_err());
        let m = nb_fit(&[vec![1.0]], &[FunctionLabel::Pos], 1.0).unwrap();
        assert!(nb_predict(&m, &[-0.5]).is_err());
        assert!(nb_fit(&[vec![1.0]], &[FunctionLabel::Pos], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn priors_sum_to_one(labels in prop::collection::vec(0usize..4, 1..40)) {
            let labels: Vec<FunctionLabel> = labels.into_iter().map(|i| FunctionLabel::ALL[i]).collect();
            let features = vec![vec![1.0, 2.0]; labels.len()];
            let m = nb_fit(&features, &labels, 1.0).unwrap();
            let s: f64 = m.log_priors.iter().map(|p| p.exp()).sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            for row in &m.log_likelihoods {
                let s: f64 = row.iter().map(|p| p.exp()).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn argmax_invariant_under_score_shift(
            rows in prop::collection::vec((0usize..4, prop::collection::vec(0.0f64..5.0, 6)), 4..30),
            x in prop::collection::vec(0.0f64..5.0, 6),
            shift in -50.0f64..50.0,
        ) {
            let (labels, features): (Vec<_>, Vec<_>) = rows.into_iter().map(|(c, f)| (FunctionLabel::ALL[c], f)).unzip();
            let m = nb_fit(&features, &labels, 1.0).unwrap();
            let scores = m.log_scores(&x).unwrap();
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            prop_assert_eq!(argmax(&scores), argmax(&shifted));
            prop_assert_eq!(nb_predict(&m, &x).unwrap().index(), argmax(&scores));
        }
    }
}
