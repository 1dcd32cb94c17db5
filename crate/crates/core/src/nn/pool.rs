use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};

/// Row-wise maximum; ties resolve to the lowest column.
pub fn max_pool(m: &Array2<f64>) -> Result<(Array1<f64>, Vec<usize>)> {
    if m.ncols() == 0 {
        return Err(Error::shape("max pooling over zero columns"));
    }
    let mut out = Array1::zeros(m.nrows());
    let mut argmax = vec![0; m.nrows()];
    for (f, row) in m.rows().into_iter().enumerate() {
        let (mut best, mut at) = (row[0], 0);
        for (j, &v) in row.iter().enumerate().skip(1) {
            if v > best {
                best = v;
                at = j;
            }
        }
        out[f] = best;
        argmax[f] = at;
    }
    Ok((out, argmax))
}

/// Routes each upstream component to the column that won the forward max.
pub fn max_pool_backward(upstream: &Array1<f64>, argmax: &[usize], cols: usize) -> Result<Array2<f64>> {
    if upstream.len() != argmax.len() {
        return Err(Error::shape(format!(
            "{} upstream values for {} rows",
            upstream.len(),
            argmax.len()
        )));
    }
    let mut d = Array2::zeros((argmax.len(), cols));
    for (f, (&g, &j)) in upstream.iter().zip(argmax).enumerate() {
        if j >= cols {
            return Err(Error::shape(format!("argmax column {j} out of {cols}")));
        }
        d[[f, j]] = g;
    }
    Ok(d)
}

/// Pools each consecutive block of `seg` columns (one block per example) to
/// one column. Returns `F × B` maxima and the winning absolute column per
/// `(row, example)`.
pub fn max_pool_segments(m: &Array2<f64>, seg: usize) -> Result<(Array2<f64>, Array2<usize>)> {
    if seg == 0 || !m.ncols().is_multiple_of(seg) {
        return Err(Error::shape(format!(
            "{} columns do not split into blocks of {seg}",
            m.ncols()
        )));
    }
    let b = m.ncols() / seg;
    let mut out = Array2::zeros((m.nrows(), b));
    let mut arg = Array2::zeros((m.nrows(), b));
    for i in 0..b {
        let block = m.slice(s![.., i * seg..(i + 1) * seg]);
        for (f, row) in block.rows().into_iter().enumerate() {
            let (mut best, mut at) = (row[0], 0);
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > best {
                    best = v;
                    at = j;
                }
            }
            out[[f, i]] = best;
            arg[[f, i]] = i * seg + at;
        }
    }
    Ok((out, arg))
}

pub fn max_pool_segments_backward(upstream: &Array2<f64>, arg: &Array2<usize>, total_cols: usize) -> Array2<f64> {
    let mut d = Array2::zeros((upstream.nrows(), total_cols));
    for ((f, i), &g) in upstream.indexed_iter() {
        d[[f, arg[[f, i]]]] = g;
    }
    d
}
