use std::collections::BTreeMap;

use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::checkpoint::TensorContainer;
use crate::nn::OptimizerState;

/// Gradients keyed by parameter name. Parameters without an entry were not
/// on the active path and must not be updated.
pub type Grads = BTreeMap<String, ArrayD<f64>>;

/// Named access to every trainable tensor, in a fixed order.
pub trait Parameterized {
    fn visit(&self, f: &mut dyn FnMut(&str, ArrayViewD<f64>));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<f64>));

    fn parameter_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.visit(&mut |n, _| names.push(n.to_string()));
        names
    }

    fn parameter_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, a| n += a.len());
        n
    }

    /// All parameters concatenated in visit order.
    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |_, a| out.extend(a.iter()));
        out
    }

    fn assign_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::shape(format!(
                "{} values for {} parameters",
                values.len(),
                self.parameter_count()
            )));
        }
        let mut pos = 0;
        self.visit_mut(&mut |_, mut a| {
            for v in a.iter_mut() {
                *v = values[pos];
                pos += 1;
            }
        });
        Ok(())
    }

    /// `grads` laid out like [`Parameterized::flatten`]; absent entries are zero.
    fn flatten_grads(&self, grads: &Grads) -> Vec<f64> {
        let mut out = Vec::new();
        self.visit(&mut |n, a| match grads.get(n) {
            Some(g) => out.extend(g.iter()),
            None => out.extend(std::iter::repeat_n(0.0, a.len())),
        });
        out
    }

    /// SHA-256 over the little-endian bytes of every parameter whose name
    /// starts with `prefix`.
    fn checksum(&self, prefix: &str) -> String {
        let mut h = Sha256::new();
        self.visit(&mut |n, a| {
            if n.starts_with(prefix) {
                h.update(n.as_bytes());
                for v in a.iter() {
                    h.update(v.to_le_bytes());
                }
            }
        });
        hex::encode(h.finalize())
    }

    /// One RMSProp update on exactly the parameters present in `grads`.
    fn apply_grads(&mut self, grads: &Grads, optimizer: &mut OptimizerState) -> Result<()> {
        let mut result = Ok(());
        self.visit_mut(&mut |n, p| {
            if result.is_err() {
                return;
            }
            if let Some(g) = grads.get(n) {
                result = optimizer.step_view(n, p, g.view());
            }
        });
        result
    }

    fn to_container(&self) -> TensorContainer {
        let mut c = TensorContainer::default();
        self.visit(&mut |n, a| c.push(n, a));
        c
    }

    fn load_container(&mut self, container: &TensorContainer) -> Result<()> {
        container.check_header()?;
        let mut result = Ok(());
        self.visit_mut(&mut |n, mut p| {
            if result.is_err() {
                return;
            }
            result = container.get(n).and_then(|a| {
                if a.shape() != p.shape() {
                    return Err(Error::shape(format!("tensor {n}: {:?} vs {:?}", a.shape(), p.shape())));
                }
                p.assign(&a);
                Ok(())
            });
        });
        result
    }
}
