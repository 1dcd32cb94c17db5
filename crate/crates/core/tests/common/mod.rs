//! Reference implementations shared by the integration tests. Each one is
//! written from the definition with plain loops, independent of the library
//! code it checks.

#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;

/// `out[f][t] = relu(b[f] + Σ_k Σ_r W[f][k·dim + r] · x[r][t + k])`
pub fn conv_oracle(x: &Array2<f64>, weights: &Array2<f64>, bias: &Array1<f64>, window: usize) -> Array2<f64> {
    let (dim, w) = x.dim();
    let positions = w + 1 - window;
    let mut out = Array2::zeros((weights.nrows(), positions));
    for f in 0..weights.nrows() {
        for t in 0..positions {
            let mut acc = bias[f];
            for k in 0..window {
                for r in 0..dim {
                    acc += weights[[f, k * dim + r]] * x[[r, t + k]];
                }
            }
            out[[f, t]] = if acc > 0.0 { acc } else { 0.0 };
        }
    }
    out
}

/// Row maxima with the first maximal column.
pub fn max_pool_oracle(m: &Array2<f64>) -> (Vec<f64>, Vec<usize>) {
    let mut values = Vec::new();
    let mut cols = Vec::new();
    for f in 0..m.nrows() {
        let mut best = 0;
        for j in 1..m.ncols() {
            if m[[f, j]] > m[[f, best]] {
                best = j;
            }
        }
        values.push(m[[f, best]]);
        cols.push(best);
    }
    (values, cols)
}

pub fn dense_oracle(v: &Array1<f64>, weights: &Array2<f64>, bias: &Array1<f64>) -> Vec<f64> {
    (0..weights.nrows())
        .map(|o| {
            let mut acc = bias[o];
            for i in 0..v.len() {
                acc += weights[[o, i]] * v[i];
            }
            acc
        })
        .collect()
}

pub fn normal_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-2.0..2.0))
}

pub fn normal_vector<R: Rng>(rng: &mut R, n: usize) -> Array1<f64> {
    Array1::from_shape_simple_fn(n, || rng.random_range(-2.0..2.0))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = C[0];
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Student t density.
pub fn t_density(x: f64, df: f64) -> f64 {
    let log_norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (log_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// `1 − 2 ∫_0^{|t|} density`, by composite Simpson on the finite interval.
pub fn quadrature_p(t: f64, df: usize) -> f64 {
    let df = df as f64;
    let a = t.abs();
    let n = 200_000;
    let h = a / n as f64;
    let mut s = t_density(0.0, df) + t_density(a, df);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * t_density(i as f64 * h, df);
    }
    1.0 - 2.0 * s * h / 3.0
}
