//! JSON model checkpoints: shapes, flat parameter arrays, the seed and the
//! hyperparameters. Floats are written with round-trip precision, so a
//! load restores every parameter bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Parameters;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHECKPOINT_FORMAT: &str = "autolabel-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    /// Which architecture the tensors belong to.
    pub kind: String,
    pub seed: u64,
    pub hyperparameters: BTreeMap<String, f64>,
    pub tensors: Vec<TensorRecord>,
}

impl Checkpoint {
    pub fn capture<T: Scalar, P: Parameters<T>>(
        kind: &str,
        seed: u64,
        hyperparameters: BTreeMap<String, f64>,
        model: &P,
    ) -> Self {
        let tensors = model
            .tensors()
            .into_iter()
            .map(|t| TensorRecord { name: t.name, shape: t.shape, data: t.data.iter().map(|v| v.as_f64()).collect() })
            .collect();
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            kind: kind.into(),
            seed,
            hyperparameters,
            tensors,
        }
    }

    pub fn hyperparameter(&self, key: &str) -> Result<f64> {
        self.hyperparameters
            .get(key)
            .copied()
            .ok_or_else(|| Error::Format(format!("checkpoint lacks hyperparameter '{key}'")))
    }

    /// Copies the stored tensors into `model`, which must already have the
    /// matching layout.
    pub fn restore<T: Scalar, P: Parameters<T>>(&self, model: &mut P) -> Result<()> {
        let layout: Vec<(String, Vec<usize>)> = model.tensors().into_iter().map(|t| (t.name, t.shape)).collect();
        if layout.len() != self.tensors.len() {
            return Err(Error::Format(format!(
                "checkpoint holds {} tensors, model has {}",
                self.tensors.len(),
                layout.len()
            )));
        }
        for ((name, shape), rec) in layout.iter().zip(&self.tensors) {
            if *name != rec.name || *shape != rec.shape {
                return Err(Error::Format(format!(
                    "checkpoint tensor '{}' {:?} does not match model tensor '{name}' {shape:?}",
                    rec.name, rec.shape
                )));
            }
        }
        for (dst, rec) in model.tensors_mut().into_iter().zip(&self.tensors) {
            if dst.len() != rec.data.len() {
                return Err(Error::Format(format!("tensor '{}' has {} values", rec.name, rec.data.len())));
            }
            for (d, &v) in dst.iter_mut().zip(&rec.data) {
                *d = T::lit(v);
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        if ck.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!("'{}' is not a model checkpoint", path.display())));
        }
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!("unsupported checkpoint version {}", ck.version)));
        }
        Ok(ck)
    }
}
