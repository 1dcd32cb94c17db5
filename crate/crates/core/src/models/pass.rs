use ndarray::{s, Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};
use rand::Rng;

use super::params::Grads;
use crate::error::{Error, Result};
use crate::nn::{
    im2col, max_pool, max_pool_segments, max_pool_segments_backward, relu, softmax, softmax_xent, ConvLayer, DenseLayer,
};
use crate::text::SequenceMatrix;
use crate::util::fnv1a_bytes;

/// Convolution followed by row-wise max pooling: one sequence in, a vector of
/// `filters` features out.
#[derive(Debug, Clone, PartialEq)]
pub struct Tower {
    pub conv: ConvLayer,
}

pub(crate) struct TowerBatch {
    cols: Array2<f64>,
    pre: Array2<f64>,
    arg: Array2<usize>,
}

impl Tower {
    pub fn init<R: Rng + ?Sized>(rng: &mut R, window: usize, dim: usize, filters: usize) -> Self {
        Self {
            conv: ConvLayer::init(rng, window, dim, filters),
        }
    }

    pub fn filters(&self) -> usize {
        self.conv.filters()
    }

    /// Pooled feature vector of a single sequence.
    pub fn encode(&self, x: &SequenceMatrix) -> Result<Array1<f64>> {
        let (act, _) = crate::nn::conv_forward(x, &self.conv)?;
        Ok(max_pool(&act)?.0)
    }

    pub(crate) fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, ArrayViewD<f64>)) {
        f(&format!("{prefix}.conv.weights"), self.conv.weights.view().into_dyn());
        f(&format!("{prefix}.conv.bias"), self.conv.bias.view().into_dyn());
    }

    pub(crate) fn visit_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>)) {
        f(
            &format!("{prefix}.conv.weights"),
            self.conv.weights.view_mut().into_dyn(),
        );
        f(&format!("{prefix}.conv.bias"), self.conv.bias.view_mut().into_dyn());
    }

    /// Batched forward: all inputs must share one width. Returns `F × B`
    /// pooled features, examples as columns.
    pub(crate) fn forward_batch(&self, xs: &[&SequenceMatrix]) -> Result<(Array2<f64>, TowerBatch)> {
        let first = xs.first().ok_or_else(|| Error::invalid("empty batch"))?;
        let (dim, width) = (first.dim(), first.width());
        if dim != self.conv.input_dim() {
            return Err(Error::shape(format!(
                "input has {dim} embedding rows, tower expects {}",
                self.conv.input_dim()
            )));
        }
        let seg = self.conv.output_width(width)?;
        let rows = self.conv.weights.ncols();
        let mut cols = Array2::zeros((rows, seg * xs.len()));
        for (i, x) in xs.iter().enumerate() {
            if x.dim() != dim || x.width() != width {
                return Err(Error::shape(format!(
                    "batch mixes {}×{} with {dim}×{width} inputs",
                    x.dim(),
                    x.width()
                )));
            }
            cols.slice_mut(s![.., i * seg..(i + 1) * seg])
                .assign(&im2col(x.0.view(), self.conv.window)?);
        }
        let pre = self.conv.pre_activations(&cols);
        let (pooled, arg) = max_pool_segments(&relu(&pre), seg)?;
        Ok((pooled, TowerBatch { cols, pre, arg }))
    }

    /// Parameter gradients given `∂L/∂pooled`. The input gradient is never
    /// formed since embeddings are frozen.
    pub(crate) fn backward_batch(&self, cache: &TowerBatch, dpooled: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
        let mut dpre = max_pool_segments_backward(dpooled, &cache.arg, cache.pre.ncols());
        ndarray::Zip::from(&mut dpre).and(&cache.pre).for_each(|g, &z| {
            if z <= 0.0 {
                *g = 0.0;
            }
        });
        (dpre.dot(&cache.cols.t()), dpre.sum_axis(Axis(1)))
    }

    /// Fingerprint of the relu mask and pooling winners.
    pub(crate) fn regime(cache: &TowerBatch) -> u64 {
        let mut bytes = Vec::with_capacity(cache.pre.len() / 8 + cache.arg.len() * 4);
        let mut acc = 0u8;
        for (i, &z) in cache.pre.iter().enumerate() {
            acc = (acc << 1) | u8::from(z > 0.0);
            if i % 8 == 7 {
                bytes.push(acc);
                acc = 0;
            }
        }
        bytes.push(acc);
        for &a in cache.arg.iter() {
            bytes.extend_from_slice(&(a as u32).to_le_bytes());
        }
        fnv1a_bytes(&bytes)
    }
}

pub(crate) fn visit_dense(prefix: &str, layer: &DenseLayer, f: &mut dyn FnMut(&str, ArrayViewD<f64>)) {
    f(&format!("{prefix}.weights"), layer.weights.view().into_dyn());
    f(&format!("{prefix}.bias"), layer.bias.view().into_dyn());
}

pub(crate) fn visit_dense_mut(prefix: &str, layer: &mut DenseLayer, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>)) {
    f(&format!("{prefix}.weights"), layer.weights.view_mut().into_dyn());
    f(&format!("{prefix}.bias"), layer.bias.view_mut().into_dyn());
}

/// One tower on the active path, its parameter prefix and its inputs.
pub(crate) struct TowerInput<'a> {
    pub name: &'a str,
    pub tower: &'a Tower,
    pub inputs: Vec<&'a SequenceMatrix>,
}

pub(crate) struct PassOutput {
    /// Mean cross-entropy over the batch.
    pub loss: f64,
    pub grads: Grads,
    pub regime: u64,
}

fn forward_features(towers: &[TowerInput]) -> Result<(Array2<f64>, Vec<TowerBatch>)> {
    let batch = towers.first().map(|t| t.inputs.len()).unwrap_or(0);
    if batch == 0 {
        return Err(Error::invalid("empty batch"));
    }
    let mut pooled = Vec::with_capacity(towers.len());
    let mut caches = Vec::with_capacity(towers.len());
    for t in towers {
        if t.inputs.len() != batch {
            return Err(Error::shape("towers received batches of different sizes"));
        }
        let (p, c) = t.tower.forward_batch(&t.inputs)?;
        pooled.push(p);
        caches.push(c);
    }
    let views: Vec<_> = pooled.iter().map(|p| p.view()).collect();
    let features = ndarray::concatenate(Axis(0), &views).map_err(|e| Error::shape(e.to_string()))?;
    Ok((features, caches))
}

/// Class probabilities, `classes × B`, for towers concatenated into `head`.
pub(crate) fn forward_probs(towers: &[TowerInput], head: &DenseLayer) -> Result<Array2<f64>> {
    let (features, _) = forward_features(towers)?;
    let logits = head.forward_batch(&features)?;
    let mut probs = Array2::zeros(logits.dim());
    for (j, col) in logits.columns().into_iter().enumerate() {
        let p = softmax(&col.to_vec());
        probs.column_mut(j).assign(&Array1::from(p));
    }
    Ok(probs)
}

/// Forward pass, mean cross-entropy against `labels`, and (optionally)
/// exact gradients for every tower and the head.
pub(crate) fn supervised_pass(
    towers: &[TowerInput],
    head_name: &str,
    head: &DenseLayer,
    labels: &[usize],
    want_grads: bool,
) -> Result<PassOutput> {
    let (features, caches) = forward_features(towers)?;
    let b = features.ncols();
    if labels.len() != b {
        return Err(Error::shape(format!("{} labels for a batch of {b}", labels.len())));
    }
    let logits = head.forward_batch(&features)?;
    let mut dlogits = Array2::zeros(logits.dim());
    let mut loss = 0.0;
    for (j, col) in logits.columns().into_iter().enumerate() {
        let r = softmax_xent(&col.to_vec(), labels[j])?;
        loss += r.loss;
        dlogits.column_mut(j).assign(&(Array1::from(r.grad) / b as f64));
    }
    loss /= b as f64;

    let regime = caches.iter().fold(0u64, |h, c| h.rotate_left(17) ^ Tower::regime(c));
    let mut grads = Grads::new();
    if want_grads {
        let (dw, db, dfeat) = head.backward_batch(&features, &dlogits);
        grads.insert(format!("{head_name}.weights"), dw.into_dyn());
        grads.insert(format!("{head_name}.bias"), db.into_dyn());
        let mut offset = 0;
        for (t, cache) in towers.iter().zip(&caches) {
            let f = t.tower.filters();
            let dpooled = dfeat.slice(s![offset..offset + f, ..]).to_owned();
            offset += f;
            let (dw, db) = t.tower.backward_batch(cache, &dpooled);
            grads.insert(format!("{}.conv.weights", t.name), dw.into_dyn());
            grads.insert(format!("{}.conv.bias", t.name), db.into_dyn());
        }
    }
    Ok(PassOutput { loss, grads, regime })
}
