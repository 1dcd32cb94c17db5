use crate::error::{Error, Result};

/// `e^{x_i} / Σ_j e^{x_j}`, evaluated after subtracting the maximum logit.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxXent {
    pub probs: Vec<f64>,
    /// `−ln p[gold]`
    pub loss: f64,
    /// `p − onehot(gold)`
    pub grad: Vec<f64>,
}

pub fn softmax_xent(logits: &[f64], gold: usize) -> Result<SoftmaxXent> {
    if gold >= logits.len() {
        return Err(Error::invalid(format!(
            "gold class {gold} out of {} classes",
            logits.len()
        )));
    }
    let probs = softmax(logits);
    // log-sum-exp form keeps the loss finite when p[gold] underflows
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&x| (x - max).exp()).sum::<f64>().ln();
    let loss = lse - logits[gold];
    let mut grad = probs.clone();
    grad[gold] -= 1.0;
    Ok(SoftmaxXent { probs, loss, grad })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair() {
        let r = softmax_xent(&[0.0, 0.0], 0).unwrap();
        assert_eq!(r.probs, vec![0.5, 0.5]);
        assert!((r.loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.grad, vec![-0.5, 0.5]);
    }

    #[test]
    fn forced_ratio() {
        let p = softmax(&[1f64.ln(), 3f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn constant_logits_are_uniform() {
        for c in [-1e6, -3.0, 0.0, 42.0, 1e6] {
            let p = softmax(&[c; 4]);
            assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        }
    }

    #[test]
    fn no_overflow() {
        let r = softmax_xent(&[1000.0, -1000.0], 1).unwrap();
        assert!(r.probs.iter().all(|p| p.is_finite()));
        assert!((r.loss - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn gold_out_of_range() {
        assert!(softmax_xent(&[0.0, 1.0], 2).is_err());
    }
}
