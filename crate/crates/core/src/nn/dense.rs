use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use super::glorot_uniform;
use crate::error::{Error, Result};

/// Affine map `W · v + b`; the softmax downstream supplies the non-linearity.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if bias.len() != weights.nrows() {
            return Err(Error::shape(format!(
                "{} biases for {} outputs",
                bias.len(),
                weights.nrows()
            )));
        }
        Ok(Self { weights, bias })
    }

    pub fn init<R: Rng + ?Sized>(rng: &mut R, inputs: usize, outputs: usize) -> Self {
        Self {
            weights: glorot_uniform(rng, (outputs, inputs), inputs, outputs),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    /// Column-batched forward: `in × B` to `out × B`.
    pub fn forward_batch(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.inputs() {
            return Err(Error::shape(format!(
                "input of {} rows, layer expects {}",
                x.nrows(),
                self.inputs()
            )));
        }
        let mut y = self.weights.dot(x);
        y += &self.bias.view().insert_axis(Axis(1));
        Ok(y)
    }

    /// Column-batched backward; returns `(dW, db, dx)`.
    pub fn backward_batch(&self, x: &Array2<f64>, upstream: &Array2<f64>) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
        (
            upstream.dot(&x.t()),
            upstream.sum_axis(Axis(1)),
            self.weights.t().dot(upstream),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub input: Array1<f64>,
}

pub fn dense_forward(v: &Array1<f64>, layer: &DenseLayer) -> Result<Array1<f64>> {
    if v.len() != layer.inputs() {
        return Err(Error::shape(format!(
            "input of length {}, layer expects {}",
            v.len(),
            layer.inputs()
        )));
    }
    Ok(layer.weights.dot(v) + &layer.bias)
}

pub fn dense_backward(v: &Array1<f64>, layer: &DenseLayer, upstream: &Array1<f64>) -> Result<DenseGrads> {
    if v.len() != layer.inputs() || upstream.len() != layer.outputs() {
        return Err(Error::shape(format!(
            "dense backward with input {} / upstream {} for a {}→{} layer",
            v.len(),
            upstream.len(),
            layer.inputs(),
            layer.outputs()
        )));
    }
    let weights = upstream.view().insert_axis(Axis(1)).dot(&v.view().insert_axis(Axis(0)));
    Ok(DenseGrads {
        weights,
        bias: upstream.clone(),
        input: layer.weights.t().dot(upstream),
    })
}
