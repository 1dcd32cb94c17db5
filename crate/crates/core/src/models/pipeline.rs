//! Featurize, train and predict in one call, for cross-validation folds and
//! the command line.

use super::{
    mtl_fit, predict_function, predict_mtl_function, predict_mtl_provenance, predict_provenance, train_single,
    CnnModel, DcnnModel, Featurizer, MtlHistory, MtlModel, NeuralModel,
};
use crate::corpus::{FunctionInstance, FunctionLabel, ProvenanceInstance, ProvenanceLabel};
use crate::error::Result;
use crate::models::TrainConfig;
use crate::text::{EmbeddingTable, SequenceMatrix};

fn function_texts<'a>(items: &'a [&'a FunctionInstance]) -> impl Iterator<Item = &'a str> + 'a {
    items.iter().map(|i| i.citing_sentence.as_str())
}

fn provenance_texts<'a>(items: &'a [&'a ProvenanceInstance]) -> impl Iterator<Item = &'a str> + 'a {
    items
        .iter()
        .flat_map(|i| [i.citing_sentence.as_str(), i.fragment.as_str()])
}

/// A trained network together with the featurizer it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub featurizer: Featurizer,
    pub model: NeuralModel,
    /// Per-epoch training loss (the averaged loss for joint models).
    pub losses: Vec<f64>,
    /// Per-task losses of a joint model, else empty.
    pub task_losses: Option<MtlHistory>,
}

impl Fitted {
    /// `unseen` texts contribute vocabulary (and so pretrained vectors)
    /// but no widths and no labels.
    pub fn cnn(
        table: &EmbeddingTable,
        train: &[&FunctionInstance],
        unseen: &[&FunctionInstance],
        config: &TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        let citing: Vec<&str> = function_texts(train).collect();
        let featurizer = Featurizer::fit(
            table,
            function_texts(train).chain(function_texts(unseen)),
            &citing,
            &[],
            config.window,
        )?;
        let data = featurizer.function_examples(train.iter().copied());
        let mut model = CnnModel::init(config.seed, table.dim(), config.window, config.filters);
        let losses = train_single(&mut model, &data, config)?;
        Ok(Self {
            featurizer,
            model: NeuralModel::Cnn(model),
            losses,
            task_losses: None,
        })
    }

    pub fn dcnn(
        table: &EmbeddingTable,
        train: &[&ProvenanceInstance],
        unseen: &[&ProvenanceInstance],
        config: &TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        let citing: Vec<&str> = train.iter().map(|i| i.citing_sentence.as_str()).collect();
        let fragments: Vec<&str> = train.iter().map(|i| i.fragment.as_str()).collect();
        let featurizer = Featurizer::fit(
            table,
            provenance_texts(train).chain(provenance_texts(unseen)),
            &citing,
            &fragments,
            config.window,
        )?;
        let data = featurizer.provenance_examples(train.iter().copied());
        let mut model = DcnnModel::init(config.seed, table.dim(), config.window, config.filters);
        let losses = train_single(&mut model, &data, config)?;
        Ok(Self {
            featurizer,
            model: NeuralModel::Dcnn(model),
            losses,
            task_losses: None,
        })
    }

    pub fn mtl(
        table: &EmbeddingTable,
        train: (&[&FunctionInstance], &[&ProvenanceInstance]),
        unseen: (&[&FunctionInstance], &[&ProvenanceInstance]),
        config: &TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        let citing: Vec<&str> = function_texts(train.0)
            .chain(train.1.iter().map(|i| i.citing_sentence.as_str()))
            .collect();
        let fragments: Vec<&str> = train.1.iter().map(|i| i.fragment.as_str()).collect();
        let vocab_texts = function_texts(train.0)
            .chain(function_texts(unseen.0))
            .chain(provenance_texts(train.1))
            .chain(provenance_texts(unseen.1));
        let featurizer = Featurizer::fit(table, vocab_texts, &citing, &fragments, config.window)?;
        let f_data = featurizer.function_examples(train.0.iter().copied());
        let p_data = featurizer.provenance_examples(train.1.iter().copied());
        let mut model = MtlModel::init(config.seed, table.dim(), config.window, config.filters);
        let history = mtl_fit(&mut model, &f_data, &p_data, config)?;
        Ok(Self {
            featurizer,
            model: NeuralModel::Mtl(model),
            losses: history.averaged.clone(),
            task_losses: Some(history),
        })
    }

    /// Function labels; errors for a provenance-only network.
    pub fn predict_function(&self, items: &[&FunctionInstance]) -> Result<Vec<FunctionLabel>> {
        let x: Vec<SequenceMatrix> = items
            .iter()
            .map(|i| self.featurizer.embed_citing(&i.citing_sentence))
            .collect();
        let refs: Vec<&SequenceMatrix> = x.iter().collect();
        let preds = match &self.model {
            NeuralModel::Cnn(m) => predict_function(m, &refs)?,
            NeuralModel::Mtl(m) => predict_mtl_function(m, &refs)?,
            NeuralModel::Dcnn(_) => {
                return Err(crate::error::Error::invalid(
                    "a dCNN does not predict citation function",
                ))
            }
        };
        Ok(preds.into_iter().map(|p| p.label).collect())
    }

    /// Provenance labels; errors for a function-only network.
    pub fn predict_provenance(&self, items: &[&ProvenanceInstance]) -> Result<Vec<ProvenanceLabel>> {
        let x: Vec<(SequenceMatrix, SequenceMatrix)> = items
            .iter()
            .map(|i| {
                (
                    self.featurizer.embed_citing(&i.citing_sentence),
                    self.featurizer.embed_fragment(&i.fragment),
                )
            })
            .collect();
        let refs: Vec<(&SequenceMatrix, &SequenceMatrix)> = x.iter().map(|(a, b)| (a, b)).collect();
        let preds = match &self.model {
            NeuralModel::Dcnn(m) => predict_provenance(m, &refs)?,
            NeuralModel::Mtl(m) => predict_mtl_provenance(m, &refs)?,
            NeuralModel::Cnn(_) => {
                return Err(crate::error::Error::invalid(
                    "a CNN does not predict citation provenance",
                ))
            }
        };
        Ok(preds.into_iter().map(|p| p.label).collect())
    }
}
