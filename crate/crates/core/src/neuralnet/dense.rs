use serde::{Deserialize, Serialize};

use super::{Initializer, Parameters, TensorView};
use crate::error::{Error, Result};
use crate::matrix::{gemm, Matrix};
use crate::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Tanh,
    Sigmoid,
}

/// `y = act(W x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    /// out x in
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        DenseLayer { weight: Matrix::zeros(output, input), bias: vec![T::zero(); output], activation }
    }

    /// Uniform initialization in `±1/sqrt(input)`.
    pub fn new(input: usize, output: usize, activation: Activation, init: &mut Initializer) -> Self {
        let mut layer = Self::zeros(input, output, activation);
        let bound = 1.0 / (input as f64).sqrt();
        init.fill(layer.weight.as_mut_slice(), bound);
        init.fill(&mut layer.bias, bound);
        layer
    }

    pub fn input_size(&self) -> usize {
        self.weight.cols()
    }

    pub fn output_size(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.input_size() {
            return Err(Error::Shape(format!("dense input has {} values, expected {}", x.len(), self.input_size())));
        }
        Ok(self
            .weight
            .iter_rows()
            .zip(&self.bias)
            .map(|(w, &b)| {
                let z = w.iter().zip(x).fold(b, |acc, (&wi, &xi)| acc + wi * xi);
                match self.activation {
                    Activation::Identity => z,
                    Activation::Tanh => z.tanh(),
                    Activation::Sigmoid => sigmoid(z),
                }
            })
            .collect())
    }

    /// Accumulates parameter gradients given the forward input `x`, its
    /// output `y` and the upstream gradient `dy`; returns `dL/dx`.
    pub fn backward(&self, x: &[T], y: &[T], dy: &[T], grads: &mut DenseLayer<T>) -> Vec<T> {
        let mut dx = vec![T::zero(); x.len()];
        for (r, (&yr, &dyr)) in y.iter().zip(dy).enumerate() {
            let dz = match self.activation {
                Activation::Identity => dyr,
                Activation::Tanh => dyr * (T::one() - yr * yr),
                Activation::Sigmoid => dyr * yr * (T::one() - yr),
            };
            grads.bias[r] = grads.bias[r] + dz;
            for (g, &xi) in grads.weight.row_mut(r).iter_mut().zip(x) {
                *g = *g + dz * xi;
            }
            for (d, &w) in dx.iter_mut().zip(self.weight.row(r)) {
                *d = *d + dz * w;
            }
        }
        dx
    }
}

impl<T: Scalar> DenseLayer<T> {
    /// Applies the layer to every row of `x`.
    pub fn forward_batch(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let mut y = Matrix::zeros(x.rows(), self.output_size());
        for b in 0..x.rows() {
            y.row_mut(b).copy_from_slice(&self.bias);
        }
        gemm(T::one(), x, false, &self.weight, true, T::one(), &mut y)?;
        match self.activation {
            Activation::Identity => {}
            Activation::Tanh => y.as_mut_slice().iter_mut().for_each(|v| *v = v.tanh()),
            Activation::Sigmoid => y.as_mut_slice().iter_mut().for_each(|v| *v = sigmoid(*v)),
        }
        Ok(y)
    }

    /// Batched counterpart of [`DenseLayer::backward`].
    pub fn backward_batch(&self, x: &Matrix<T>, y: &Matrix<T>, dy: &Matrix<T>, grads: &mut DenseLayer<T>) -> Result<Matrix<T>> {
        let one = T::one();
        let dz = match self.activation {
            Activation::Identity => dy.clone(),
            Activation::Tanh => {
                let mut dz = dy.clone();
                for (d, &v) in dz.as_mut_slice().iter_mut().zip(y.as_slice()) {
                    *d = *d * (one - v * v);
                }
                dz
            }
            Activation::Sigmoid => {
                let mut dz = dy.clone();
                for (d, &v) in dz.as_mut_slice().iter_mut().zip(y.as_slice()) {
                    *d = *d * v * (one - v);
                }
                dz
            }
        };
        gemm(one, &dz, true, x, false, one, &mut grads.weight)?;
        for row in dz.iter_rows() {
            for (g, &v) in grads.bias.iter_mut().zip(row) {
                *g = *g + v;
            }
        }
        let mut dx = Matrix::zeros(x.rows(), self.input_size());
        gemm(one, &dz, false, &self.weight, false, T::zero(), &mut dx)?;
        Ok(dx)
    }
}

impl<T: Scalar> Parameters<T> for DenseLayer<T> {
    fn tensors(&self) -> Vec<TensorView<'_, T>> {
        vec![
            TensorView {
                name: "weight".into(),
                shape: vec![self.weight.rows(), self.weight.cols()],
                data: self.weight.as_slice(),
            },
            TensorView { name: "bias".into(), shape: vec![self.bias.len()], data: &self.bias },
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        vec![self.weight.as_mut_slice(), &mut self.bias]
    }
}
