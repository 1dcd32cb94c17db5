//! Central-difference checks of every layer's backward pass, and of whole
//! networks on every coordinate.

mod common;

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use citescope::models::check::{check_random_model, CheckSetup, Coverage};
use citescope::models::ModelKind;
use citescope::nn::{
    conv_backward, conv_forward, dense_backward, dense_forward, max_pool, max_pool_backward, relative_error,
    softmax_xent, ConvLayer, DenseLayer,
};
use citescope::text::SequenceMatrix;

use common::{normal_matrix, normal_vector};

const EPS: f64 = 1e-6;

/// Central difference of `f` along every entry of `x`.
fn numeric<F: FnMut(&[f64]) -> f64>(x: &[f64], mut f: F) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + EPS;
            let up = f(&p);
            p[i] = x[i] - EPS;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * EPS)
        })
        .collect()
}

fn assert_close(analytic: &[f64], numeric: &[f64], what: &str) {
    assert_eq!(analytic.len(), numeric.len(), "{what}");
    for (i, (a, n)) in analytic.iter().zip(numeric).enumerate() {
        assert!(
            relative_error(*a, *n) < 1e-6 || (a - n).abs() < 1e-8,
            "{what}[{i}]: analytic {a} numeric {n}"
        );
    }
}

fn weighted_sum(out: &Array2<f64>, upstream: &Array2<f64>) -> f64 {
    (out * upstream).sum()
}

fn conv_case(seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (window, dim, filters) = (rng.random_range(1..5), rng.random_range(1..6), rng.random_range(1..5));
    let width = rng.random_range(window..window + 6);
    let layer = ConvLayer::new(
        window,
        normal_matrix(&mut rng, filters, window * dim),
        normal_vector(&mut rng, filters),
    )
    .unwrap();
    let x = normal_matrix(&mut rng, dim, width);
    let (out, cache) = conv_forward(&SequenceMatrix(x.clone()), &layer).unwrap();
    let upstream = normal_matrix(&mut rng, out.nrows(), out.ncols());
    let g = conv_backward(&layer, &cache, &upstream, true).unwrap();

    // Skip draws with a pre-activation within reach of the relu kink.
    if cache.pre.iter().any(|z| z.abs() < 1e-4) {
        return;
    }
    let loss_w = |w: &[f64]| {
        let mut l = layer.clone();
        l.weights = Array2::from_shape_vec(layer.weights.dim(), w.to_vec()).unwrap();
        weighted_sum(&conv_forward(&SequenceMatrix(x.clone()), &l).unwrap().0, &upstream)
    };
    let loss_b = |b: &[f64]| {
        let mut l = layer.clone();
        l.bias = Array1::from(b.to_vec());
        weighted_sum(&conv_forward(&SequenceMatrix(x.clone()), &l).unwrap().0, &upstream)
    };
    let loss_x = |v: &[f64]| {
        let input = Array2::from_shape_vec(x.dim(), v.to_vec()).unwrap();
        weighted_sum(&conv_forward(&SequenceMatrix(input), &layer).unwrap().0, &upstream)
    };
    let flat = |a: &Array2<f64>| a.iter().copied().collect::<Vec<_>>();
    assert_close(&flat(&g.weights), &numeric(&flat(&layer.weights), loss_w), "conv dW");
    assert_close(&g.bias.to_vec(), &numeric(&layer.bias.to_vec(), loss_b), "conv db");
    assert_close(&flat(g.input.as_ref().unwrap()), &numeric(&flat(&x), loss_x), "conv dx");
}

#[test]
fn conv_backward_matches_differences() {
    for seed in 0..40 {
        conv_case(seed);
    }
}

#[test]
fn dense_backward_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let (inputs, outputs) = (rng.random_range(1..12), rng.random_range(1..6));
        let layer = DenseLayer::new(
            normal_matrix(&mut rng, outputs, inputs),
            normal_vector(&mut rng, outputs),
        )
        .unwrap();
        let v = normal_vector(&mut rng, inputs);
        let upstream = normal_vector(&mut rng, outputs);
        let g = dense_backward(&v, &layer, &upstream).unwrap();
        let dot = |out: Array1<f64>| out.dot(&upstream);
        let num_w = numeric(&layer.weights.iter().copied().collect::<Vec<_>>(), |w| {
            let mut l = layer.clone();
            l.weights = Array2::from_shape_vec(layer.weights.dim(), w.to_vec()).unwrap();
            dot(dense_forward(&v, &l).unwrap())
        });
        let num_b = numeric(&layer.bias.to_vec(), |b| {
            let mut l = layer.clone();
            l.bias = Array1::from(b.to_vec());
            dot(dense_forward(&v, &l).unwrap())
        });
        let num_x = numeric(&v.to_vec(), |x| {
            dot(dense_forward(&Array1::from(x.to_vec()), &layer).unwrap())
        });
        assert_close(&g.weights.iter().copied().collect::<Vec<_>>(), &num_w, "dense dW");
        assert_close(&g.bias.to_vec(), &num_b, "dense db");
        assert_close(&g.input.to_vec(), &num_x, "dense dx");
    }
}

#[test]
fn max_pool_backward_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let (rows, cols) = (rng.random_range(1..6), rng.random_range(1..9));
        let m = normal_matrix(&mut rng, rows, cols);
        let upstream = normal_vector(&mut rng, rows);
        let (_, arg) = max_pool(&m).unwrap();
        let g = max_pool_backward(&upstream, &arg, cols).unwrap();
        let num = numeric(&m.iter().copied().collect::<Vec<_>>(), |v| {
            let a = Array2::from_shape_vec((rows, cols), v.to_vec()).unwrap();
            max_pool(&a).unwrap().0.dot(&upstream)
        });
        assert_close(&g.iter().copied().collect::<Vec<_>>(), &num, "max_pool dm");
    }
}

#[test]
fn softmax_xent_gradient_matches_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let n = rng.random_range(2..8);
        let logits: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let gold = rng.random_range(0..n);
        let r = softmax_xent(&logits, gold).unwrap();
        let num = numeric(&logits, |z| softmax_xent(z, gold).unwrap().loss);
        assert_close(&r.grad, &num, "softmax_xent dz");
    }
}

fn small_setup(seed: u64, window: usize, filters: usize) -> CheckSetup {
    CheckSetup {
        window,
        filters,
        width: window + 6,
        dim: 5,
        batch: 3,
        epsilon: 1e-5,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn whole_networks_every_coordinate(seed in 0u64..1000, window in 1usize..5, filters in 1usize..6) {
        for kind in [ModelKind::Cnn, ModelKind::Dcnn, ModelKind::Mtl] {
            for (name, r) in check_random_model(kind, small_setup(seed, window, filters), Coverage::All).unwrap() {
                prop_assert!(r.max_rel_error < 1e-4, "{name}: {r:?}");
                prop_assert!(r.checked > 0);
            }
        }
    }
}
