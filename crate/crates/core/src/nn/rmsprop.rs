use std::collections::BTreeMap;

use ndarray::{Array, ArrayD, ArrayViewD, ArrayViewMutD, Dimension, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            rho: 0.9,
            eps: 1e-8,
        }
    }
}

/// One elementwise update:
/// `acc ← ρ·acc + (1−ρ)·g²`, `θ ← θ − lr·g / (√acc + ε)`.
pub fn rmsprop_step(
    mut param: ArrayViewMutD<f64>,
    grad: ArrayViewD<f64>,
    mut acc: ArrayViewMutD<f64>,
    cfg: &RmsPropConfig,
) -> Result<()> {
    if param.shape() != grad.shape() || param.shape() != acc.shape() {
        return Err(Error::shape(format!(
            "rmsprop on param {:?}, grad {:?}, accumulator {:?}",
            param.shape(),
            grad.shape(),
            acc.shape()
        )));
    }
    let RmsPropConfig { lr, rho, eps } = *cfg;
    Zip::from(&mut param).and(&grad).and(&mut acc).for_each(|p, &g, a| {
        *a = rho * *a + (1.0 - rho) * g * g;
        *p -= lr * g / (a.sqrt() + eps);
    });
    Ok(())
}

/// Squared-gradient accumulators keyed by parameter name, created lazily at
/// zero on first update.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: RmsPropConfig,
    acc: BTreeMap<String, ArrayD<f64>>,
}

impl OptimizerState {
    pub fn new(config: RmsPropConfig) -> Self {
        Self {
            config,
            acc: BTreeMap::new(),
        }
    }

    pub fn step<D: Dimension>(&mut self, name: &str, param: &mut Array<f64, D>, grad: &Array<f64, D>) -> Result<()> {
        self.step_view(name, param.view_mut().into_dyn(), grad.view().into_dyn())
    }

    pub fn step_view(&mut self, name: &str, param: ArrayViewMutD<f64>, grad: ArrayViewD<f64>) -> Result<()> {
        let acc = self
            .acc
            .entry(name.to_string())
            .or_insert_with(|| ArrayD::zeros(param.shape()));
        rmsprop_step(param, grad, acc.view_mut(), &self.config)
    }

    pub fn accumulator(&self, name: &str) -> Option<&ArrayD<f64>> {
        self.acc.get(name)
    }

    pub fn accumulators(&self) -> impl Iterator<Item = (&str, &ArrayD<f64>)> {
        self.acc.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Array1};
    use proptest::prelude::*;

    #[test]
    fn zero_gradient_only_decays() {
        let mut state = OptimizerState::new(RmsPropConfig::default());
        let mut p = arr1(&[1.0, -2.0]);
        state.step("p", &mut p, &arr1(&[1.0, 1.0])).unwrap();
        let before = state.accumulator("p").unwrap().clone();
        let p_before = p.clone();
        state.step("p", &mut p, &Array1::zeros(2)).unwrap();
        assert_eq!(p, p_before);
        assert_eq!(state.accumulator("p").unwrap(), &(before * 0.9));
    }

    #[test]
    fn hand_arithmetic() {
        let mut state = OptimizerState::new(RmsPropConfig::default());
        let mut p = arr1(&[0.0]);
        state.step("w", &mut p, &arr1(&[1.0])).unwrap();
        let acc = state.accumulator("w").unwrap()[[0]];
        assert!((acc - 0.1).abs() < 1e-15);
        // 0.001 / (√0.1 + 1e−8)
        assert!((p[0] + 0.001 / (0.1f64.sqrt() + 1e-8)).abs() < 1e-15);
        assert!((p[0] + 0.0031623).abs() < 1e-7);
    }

    #[test]
    fn identical_twins_stay_identical() {
        let mut state = OptimizerState::new(RmsPropConfig::default());
        let mut p = arr1(&[0.5, 0.5]);
        for g in [0.3, -1.2, 4.0, 0.0, 2.5] {
            state.step("p", &mut p, &arr1(&[g, g])).unwrap();
            assert_eq!(p[0], p[1]);
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut state = OptimizerState::new(RmsPropConfig::default());
        let mut p = arr1(&[0.0, 1.0]);
        assert!(state.step("p", &mut p, &arr1(&[1.0, 2.0, 3.0])).is_err());
    }

    proptest! {
        #[test]
        fn accumulator_stays_non_negative(grads in proptest::collection::vec(-1e3f64..1e3, 1..50)) {
            let mut state = OptimizerState::new(RmsPropConfig::default());
            let mut p = arr1(&[0.0]);
            for g in grads {
                state.step("p", &mut p, &arr1(&[g])).unwrap();
                prop_assert!(state.accumulator("p").unwrap()[[0]] >= 0.0);
            }
        }
    }
}
