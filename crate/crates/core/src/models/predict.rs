use rayon::prelude::*;
use serde::Serialize;

use super::pass::{forward_probs, TowerInput};
use super::{CnnModel, DcnnModel, MtlModel};
use crate::corpus::{ClassLabel, FunctionLabel, ProvenanceLabel};
use crate::error::{Error, Result};
use crate::nn::DenseLayer;
use crate::text::SequenceMatrix;

const CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction<L> {
    pub label: L,
    pub probs: Vec<f64>,
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn to_predictions<L: ClassLabel>(probs: ndarray::Array2<f64>) -> Result<Vec<Prediction<L>>> {
    probs
        .columns()
        .into_iter()
        .map(|c| {
            let probs = c.to_vec();
            let idx = argmax(&probs);
            let label = L::from_index(idx).ok_or_else(|| Error::shape(format!("class {idx} out of range")))?;
            Ok(Prediction { label, probs })
        })
        .collect()
}

/// Chunked inference; chunks run in parallel but each result depends only
/// on its own input.
fn run<'a, T, L, F>(items: &'a [T], head: &DenseLayer, towers: F) -> Result<Vec<Prediction<L>>>
where
    T: Sync,
    L: ClassLabel,
    F: Fn(&'a [T]) -> Vec<TowerInput<'a>> + Sync,
{
    let chunks: Vec<Result<Vec<Prediction<L>>>> = items
        .par_chunks(CHUNK)
        .map(|chunk| to_predictions(forward_probs(&towers(chunk), head)?))
        .collect();
    let mut out = Vec::with_capacity(items.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

pub fn predict_function(model: &CnnModel, citing: &[&SequenceMatrix]) -> Result<Vec<Prediction<FunctionLabel>>> {
    run(citing, &model.head, |c| model.towers(c.to_vec()))
}

pub fn predict_provenance(
    model: &DcnnModel,
    pairs: &[(&SequenceMatrix, &SequenceMatrix)],
) -> Result<Vec<Prediction<ProvenanceLabel>>> {
    run(pairs, &model.head, |c| {
        model.towers(c.iter().map(|p| p.0).collect(), c.iter().map(|p| p.1).collect())
    })
}

pub fn predict_mtl_function(model: &MtlModel, citing: &[&SequenceMatrix]) -> Result<Vec<Prediction<FunctionLabel>>> {
    run(citing, &model.function_head, |c| model.function_towers(c.to_vec()))
}

pub fn predict_mtl_provenance(
    model: &MtlModel,
    pairs: &[(&SequenceMatrix, &SequenceMatrix)],
) -> Result<Vec<Prediction<ProvenanceLabel>>> {
    run(pairs, &model.provenance_head, |c| {
        model.provenance_towers(c.iter().map(|p| p.0).collect(), c.iter().map(|p| p.1).collect())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_rules() {
        assert_eq!(argmax(&[0.1, 0.7, 0.1, 0.1]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }
}
