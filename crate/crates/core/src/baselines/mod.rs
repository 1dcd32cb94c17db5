//! Classical baselines: multinomial naive Bayes over hand-built citation
//! function features, and a CART tree over citation/fragment overlap
//! features.

mod csv;
mod function;
mod nb;
mod provenance;
mod tree;

pub use csv::{function_features_csv, provenance_features_csv};
pub use function::{
    count_citation_markers, extract_function_features, select_unigrams, FunctionFeatureVector, DEFAULT_UNIGRAM_COUNT,
};
pub use nb::{nb_fit, nb_predict, NbModel, DEFAULT_ALPHA};
pub use provenance::{extract_provenance_features, is_decimal_number, ProvenanceFeatureVector};
pub use tree::{tree_fit, tree_predict, TreeConfig, TreeModel, TreeNode};

use serde::{Deserialize, Serialize};

use crate::corpus::{FunctionInstance, FunctionLabel, ProvenanceInstance, ProvenanceLabel};
use crate::error::Result;

/// Unigram selection plus naive Bayes, fitted on one training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionBaseline {
    pub unigrams: Vec<String>,
    pub model: NbModel,
}

impl FunctionBaseline {
    pub fn fit(train: &[&FunctionInstance]) -> Result<Self> {
        let unigrams = select_unigrams(train, DEFAULT_UNIGRAM_COUNT)?;
        let features: Vec<Vec<f64>> = train
            .iter()
            .map(|i| extract_function_features(i, &unigrams).to_nb_counts())
            .collect();
        let labels: Vec<FunctionLabel> = train.iter().map(|i| i.label).collect();
        let model = nb_fit(&features, &labels, DEFAULT_ALPHA)?;
        Ok(Self { unigrams, model })
    }

    pub fn predict(&self, instance: &FunctionInstance) -> Result<FunctionLabel> {
        nb_predict(
            &self.model,
            &extract_function_features(instance, &self.unigrams).to_nb_counts(),
        )
    }
}

/// The overlap-feature decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceBaseline {
    pub tree: TreeModel,
}

impl ProvenanceBaseline {
    pub fn features(instance: &ProvenanceInstance) -> ProvenanceFeatureVector {
        extract_provenance_features(&instance.citation_context(), &instance.fragment)
    }

    pub fn fit(train: &[&ProvenanceInstance]) -> Result<Self> {
        let features: Vec<ProvenanceFeatureVector> = train.iter().map(|i| Self::features(i)).collect();
        let labels: Vec<ProvenanceLabel> = train.iter().map(|i| i.label).collect();
        Ok(Self {
            tree: tree_fit(&features, &labels, TreeConfig::default())?,
        })
    }

    pub fn predict(&self, instance: &ProvenanceInstance) -> ProvenanceLabel {
        tree_predict(&self.tree, &Self::features(instance))
    }
}
