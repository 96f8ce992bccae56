//! The small differentiable kernel shared by the sequence autoencoder and
//! the per-class VAEs: an LSTM cell, a dense layer, RMSProp and gradient
//! clipping. Backpropagation is written out by hand for the two fixed
//! architectures; there is no general autodiff.

mod checkpoint;
mod dense;
mod lstm;
mod optim;

pub use checkpoint::{Checkpoint, TensorRecord, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use dense::{Activation, DenseLayer};
pub use lstm::{BatchRun, BatchTrace, LstmRun, LstmTrace, RecurrentCell};
pub use optim::{clip_global_norm, OptimizerState};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Global gradient-norm cap applied before every optimizer step.
pub const GRADIENT_CLIP_NORM: f64 = 5.0;

/// A named view of one parameter tensor.
#[derive(Debug)]
pub struct TensorView<'a, T> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [T],
}

/// Anything holding trainable tensors. Gradients use the same type as the
/// model they belong to, so the two can be walked in lockstep.
pub trait Parameters<T: Scalar> {
    /// Tensors in a fixed order, with stable names.
    fn tensors(&self) -> Vec<TensorView<'_, T>>;

    /// Mutable tensors, in the same order as [`Parameters::tensors`].
    fn tensors_mut(&mut self) -> Vec<&mut [T]>;

    fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v = T::zero());
        }
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }

    /// Multiplies every entry by `factor`.
    fn scale(&mut self, factor: T) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v = *v * factor);
        }
    }

    /// Flattened copy of every parameter.
    fn flatten(&self) -> Vec<T> {
        self.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// Overwrites every parameter from a flat vector produced by
    /// [`Parameters::flatten`].
    fn assign_flat(&mut self, flat: &[T]) -> Result<()> {
        let total = self.parameter_count();
        if flat.len() != total {
            return Err(Error::Shape(format!("{} values for {total} parameters", flat.len())));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }
}

/// Seeded uniform initializer drawing from `[-bound, bound]`.
pub struct Initializer {
    rng: ChaCha8Rng,
}

impl Initializer {
    pub fn new(seed: u64) -> Self {
        Initializer { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn fill<T: Scalar>(&mut self, out: &mut [T], bound: f64) {
        for v in out.iter_mut() {
            *v = T::lit(self.rng.random_range(-bound..=bound));
        }
    }
}
