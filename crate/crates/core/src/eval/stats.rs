use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::report::EvalReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    /// Two-sided.
    pub p_value: f64,
}

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `df`
/// degrees of freedom.
pub fn t_two_sided_p(t: f64, df: usize) -> f64 {
    let v = df as f64;
    beta_reg(v / 2.0, 0.5, v / (v + t * t))
}

/// Paired t-test on `a[i] - b[i]`.
///
/// When every difference is identical the sample deviation is zero: the
/// result is `t = 0, p = 1` if the differences are all zero and an error
/// otherwise.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired lists of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("a paired t-test needs at least two pairs"));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite score {v}")));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = d.len() - 1;
    if d.iter().all(|&x| x == d[0]) {
        if d[0] == 0.0 {
            return Ok(TTestResult {
                t: 0.0,
                df,
                p_value: 1.0,
            });
        }
        return Err(Error::invalid(format!(
            "every paired difference equals {}; the t statistic is undefined",
            d[0]
        )));
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t = mean / (sd / n.sqrt());
    Ok(TTestResult {
        t,
        df,
        p_value: t_two_sided_p(t, df),
    })
}

/// `**` below 0.001, `*` below 0.01, otherwise empty.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "**"
    } else if p < 0.01 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    A,
    B,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub test: TTestResult,
    /// Mean of `f1_a - f1_b` over aligned (run, fold) pairs.
    pub mean_difference: f64,
    pub winner: Winner,
    /// Significance marker for the winner; empty for ties.
    pub stars: String,
}

/// Paired t-test over the (run, fold)-aligned weighted F1 of two reports.
pub fn compare_models(a: &EvalReport, b: &EvalReport) -> Result<Comparison> {
    let shape = |r: &EvalReport| r.fold_scores.iter().map(Vec::len).collect::<Vec<_>>();
    if shape(a) != shape(b) {
        return Err(Error::invalid(format!(
            "reports are not aligned: folds per run {:?} vs {:?}",
            shape(a),
            shape(b)
        )));
    }
    let (fa, fb) = (a.fold_f1(), b.fold_f1());
    let test = paired_t_test(&fa, &fb)?;
    let mean_difference = fa.iter().zip(&fb).map(|(x, y)| x - y).sum::<f64>() / fa.len() as f64;
    let winner = if test.t > 0.0 {
        Winner::A
    } else if test.t < 0.0 {
        Winner::B
    } else {
        Winner::Tie
    };
    let stars = if winner == Winner::Tie {
        ""
    } else {
        significance_stars(test.p_value)
    };
    Ok(Comparison {
        test,
        mean_difference,
        winner,
        stars: stars.to_string(),
    })
}
