use crate::error::{Error, Result};

/// Loss at a parameter point plus a fingerprint of its piecewise-linear
/// regime (relu masks, pooling winners). Central differences are only
/// meaningful when both probes stay in the regime of the centre point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub loss: f64,
    pub regime: u64,
}

impl From<f64> for Probe {
    fn from(loss: f64) -> Self {
        Self { loss, regime: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Coordinate attaining `max_rel_error`.
    pub worst: Option<usize>,
    pub checked: usize,
    /// Coordinates whose probes crossed a kink.
    pub skipped: usize,
}

/// `|a − n| / max(|a| + |n|, 1e−8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares `analytic` against central differences of `f` at every coordinate.
pub fn grad_check<F>(mut f: F, params: &[f64], analytic: &[f64], epsilon: f64) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let coords: Vec<usize> = (0..params.len()).collect();
    grad_check_coords(|p| f(p).map(Probe::from), params, analytic, &coords, epsilon)
}

/// Central-difference check restricted to `coords`, skipping coordinates
/// whose ±ε probes land in a different regime than the centre.
pub fn grad_check_coords<F>(
    mut f: F,
    params: &[f64],
    analytic: &[f64],
    coords: &[usize],
    epsilon: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> Result<Probe>,
{
    if params.len() != analytic.len() {
        return Err(Error::shape(format!(
            "{} parameters but {} analytic gradients",
            params.len(),
            analytic.len()
        )));
    }
    let centre = f(params)?;
    if !centre.loss.is_finite() {
        return Err(Error::NonFinite(centre.loss));
    }
    let mut theta = params.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
        skipped: 0,
    };
    for &i in coords {
        if i >= theta.len() {
            return Err(Error::invalid(format!("coordinate {i} out of {}", theta.len())));
        }
        let orig = theta[i];
        theta[i] = orig + epsilon;
        let plus = f(&theta)?;
        theta[i] = orig - epsilon;
        let minus = f(&theta)?;
        theta[i] = orig;
        if !plus.loss.is_finite() || !minus.loss.is_finite() {
            return Err(Error::NonFinite(if plus.loss.is_finite() {
                minus.loss
            } else {
                plus.loss
            }));
        }
        if plus.regime != centre.regime || minus.regime != centre.regime {
            report.skipped += 1;
            continue;
        }
        let numeric = (plus.loss - minus.loss) / (2.0 * epsilon);
        let err = relative_error(analytic[i], numeric);
        report.checked += 1;
        if report.worst.is_none() || err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst = Some(i);
        }
    }
    Ok(report)
}
