use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use super::glorot_uniform;
use crate::error::{Error, Result};
use crate::text::SequenceMatrix;

/// Cross-correlation over word windows followed by relu.
///
/// Row `f` of `weights` is the filter for output row `f`, laid out word by
/// word: entry `k * dim + r` multiplies embedding row `r` of the `k`-th word
/// in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub window: usize,
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl ConvLayer {
    pub fn new(window: usize, weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if window == 0 || weights.nrows() == 0 {
            return Err(Error::invalid("window and filter count must be positive"));
        }
        if !weights.ncols().is_multiple_of(window) || weights.ncols() == 0 {
            return Err(Error::shape(format!(
                "filter length {} is not a multiple of window {window}",
                weights.ncols()
            )));
        }
        if bias.len() != weights.nrows() {
            return Err(Error::shape(format!(
                "{} biases for {} filters",
                bias.len(),
                weights.nrows()
            )));
        }
        Ok(Self { window, weights, bias })
    }

    /// Glorot-initialized filters with zero biases.
    pub fn init<R: Rng + ?Sized>(rng: &mut R, window: usize, dim: usize, filters: usize) -> Self {
        let fan_in = window * dim;
        Self {
            window,
            weights: glorot_uniform(rng, (filters, fan_in), fan_in, filters),
            bias: Array1::zeros(filters),
        }
    }

    pub fn filters(&self) -> usize {
        self.weights.nrows()
    }

    /// Embedding dimension expected from the input.
    pub fn input_dim(&self) -> usize {
        self.weights.ncols() / self.window
    }

    /// Output columns for an input of `width` words.
    pub fn output_width(&self, width: usize) -> Result<usize> {
        if width < self.window {
            return Err(Error::shape(format!(
                "sequence of {width} words is shorter than window {}",
                self.window
            )));
        }
        Ok(width - self.window + 1)
    }

    /// Pre-activations `W · cols + b` for an unrolled input.
    pub fn pre_activations(&self, cols: &Array2<f64>) -> Array2<f64> {
        let mut z = self.weights.dot(cols);
        z += &self.bias.view().insert_axis(Axis(1));
        z
    }
}

/// Unrolls a `dim × w` input into `(n·dim) × (w − n + 1)`; column `t` is the
/// window starting at word `t`, flattened word by word.
pub fn im2col(x: ArrayView2<f64>, window: usize) -> Result<Array2<f64>> {
    let (dim, w) = x.dim();
    if w < window {
        return Err(Error::shape(format!(
            "sequence of {w} words is shorter than window {window}"
        )));
    }
    let c = w - window + 1;
    let mut cols = Array2::zeros((window * dim, c));
    for k in 0..window {
        for r in 0..dim {
            cols.row_mut(k * dim + r).assign(&x.row(r).slice(s![k..k + c]));
        }
    }
    Ok(cols)
}

/// Adjoint of [`im2col`]: accumulates unrolled gradients back onto the input.
pub fn col2im(dcols: ArrayView2<f64>, dim: usize, window: usize) -> Array2<f64> {
    let c = dcols.ncols();
    let mut dx = Array2::zeros((dim, c + window - 1));
    for k in 0..window {
        for r in 0..dim {
            let mut dst = dx.row_mut(r);
            let mut dst = dst.slice_mut(s![k..k + c]);
            dst += &dcols.row(k * dim + r);
        }
    }
    dx
}

pub fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| v.max(0.0))
}

/// Values kept from the forward pass for [`conv_backward`].
#[derive(Debug, Clone)]
pub struct ConvCache {
    pub cols: Array2<f64>,
    pub pre: Array2<f64>,
    pub input_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    /// Gradient with respect to the `dim × w` input, when requested.
    pub input: Option<Array2<f64>>,
}

/// `relu(W · window_t + b)` for every window position `t`; returns the
/// `F × (w − n + 1)` activations and the cache for the backward pass.
pub fn conv_forward(x: &SequenceMatrix, layer: &ConvLayer) -> Result<(Array2<f64>, ConvCache)> {
    if x.dim() != layer.input_dim() {
        return Err(Error::shape(format!(
            "input has {} embedding rows, layer expects {}",
            x.dim(),
            layer.input_dim()
        )));
    }
    let cols = im2col(x.0.view(), layer.window)?;
    let pre = layer.pre_activations(&cols);
    Ok((
        relu(&pre),
        ConvCache {
            cols,
            pre,
            input_dim: x.dim(),
        },
    ))
}

/// Exact gradients of [`conv_forward`]. Relu passes gradient only where the
/// pre-activation is strictly positive.
pub fn conv_backward(
    layer: &ConvLayer,
    cache: &ConvCache,
    upstream: &Array2<f64>,
    want_input: bool,
) -> Result<ConvGrads> {
    if upstream.dim() != cache.pre.dim() {
        return Err(Error::shape(format!(
            "upstream {:?} does not match activations {:?}",
            upstream.dim(),
            cache.pre.dim()
        )));
    }
    if cache.cols.nrows() != layer.weights.ncols() {
        return Err(Error::shape("cache was not produced by this layer"));
    }
    let mut dpre = upstream.clone();
    ndarray::Zip::from(&mut dpre).and(&cache.pre).for_each(|g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
    let weights = dpre.dot(&cache.cols.t());
    let bias = dpre.sum_axis(Axis(1));
    let input = want_input.then(|| col2im(layer.weights.t().dot(&dpre).view(), cache.input_dim, layer.window));
    Ok(ConvGrads { weights, bias, input })
}
