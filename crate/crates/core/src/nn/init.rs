use ndarray::{Array, Dimension, ShapeBuilder};
use rand::Rng;

/// Uniform(−l, l) with l = √(6 / (fan_in + fan_out)).
pub fn glorot_uniform<D, Sh, R>(rng: &mut R, shape: Sh, fan_in: usize, fan_out: usize) -> Array<f64, D>
where
    D: Dimension,
    Sh: ShapeBuilder<Dim = D>,
    R: Rng + ?Sized,
{
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array::from_shape_simple_fn(shape, || rng.random_range(-limit..=limit))
}
