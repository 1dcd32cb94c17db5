//! Versioned JSON container of named `f64` tensors.
//!
//! Layout:
//!
//! ```json
//! {"format":"citescope-tensors","version":1,"byte_order":"little",
//!  "tensors":[{"name":"tower.conv.weights","shape":[256,500],"data":"<base64>"}]}
//! ```
//!
//! `data` is the row-major (C order) element sequence, each element the
//! 8-byte little-endian IEEE-754 encoding, base64 with padding. Values
//! round-trip bit for bit.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use ndarray::{ArrayD, ArrayViewD, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT: &str = "citescope-tensors";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    data: String,
}

impl NamedTensor {
    pub fn new(name: impl Into<String>, array: ArrayViewD<f64>) -> Self {
        let mut bytes = Vec::with_capacity(array.len() * 8);
        for v in array.iter() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        Self {
            name: name.into(),
            shape: array.shape().to_vec(),
            data: STANDARD.encode(bytes),
        }
    }

    pub fn to_array(&self) -> Result<ArrayD<f64>> {
        let bytes = STANDARD
            .decode(&self.data)
            .map_err(|e| Error::invalid(format!("tensor {}: {e}", self.name)))?;
        let expected: usize = self.shape.iter().product();
        if bytes.len() != expected * 8 {
            return Err(Error::shape(format!(
                "tensor {}: {} bytes for shape {:?}",
                self.name,
                bytes.len(),
                self.shape
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        ArrayD::from_shape_vec(IxDyn(&self.shape), values).map_err(|e| Error::shape(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorContainer {
    pub format: String,
    pub version: u32,
    pub byte_order: String,
    pub tensors: Vec<NamedTensor>,
}

impl Default for TensorContainer {
    fn default() -> Self {
        Self {
            format: FORMAT.to_string(),
            version: VERSION,
            byte_order: "little".to_string(),
            tensors: Vec::new(),
        }
    }
}

impl TensorContainer {
    pub fn push(&mut self, name: impl Into<String>, array: ArrayViewD<f64>) {
        self.tensors.push(NamedTensor::new(name, array));
    }

    pub fn get(&self, name: &str) -> Result<ArrayD<f64>> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::invalid(format!("checkpoint has no tensor {name:?}")))?
            .to_array()
    }

    pub fn check_header(&self) -> Result<()> {
        if self.format != FORMAT || self.version != VERSION || self.byte_order != "little" {
            return Err(Error::invalid(format!(
                "unsupported tensor container {} v{} ({})",
                self.format, self.version, self.byte_order
            )));
        }
        Ok(())
    }
}
