use super::Parameters;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// RMSProp hyperparameters and per-parameter squared-gradient averages.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub learning_rate: T,
    pub decay: T,
    pub epsilon: T,
    accumulators: Vec<Vec<T>>,
}

impl<T: Scalar> Default for OptimizerState<T> {
    fn default() -> Self {
        Self::new(T::lit(0.003))
    }
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(learning_rate: T) -> Self {
        OptimizerState { learning_rate, decay: T::lit(0.9), epsilon: T::lit(1e-8), accumulators: Vec::new() }
    }

    pub fn accumulators(&self) -> &[Vec<T>] {
        &self.accumulators
    }

    /// One RMSProp update:
    /// `a <- decay*a + (1-decay)*g^2`, `theta <- theta - lr*g/sqrt(a+eps)`.
    ///
    /// A non-finite gradient aborts the step without touching `params`.
    pub fn step<P: Parameters<T>>(&mut self, params: &mut P, grads: &P, epoch: usize) -> Result<()> {
        let grad_views = grads.tensors();
        if let Some(bad) = grad_views.iter().find(|t| t.data.iter().any(|g| !g.is_finite())) {
            return Err(Error::Training { epoch, message: format!("non-finite gradient in tensor '{}'", bad.name) });
        }
        if self.accumulators.is_empty() {
            self.accumulators = grad_views.iter().map(|t| vec![T::zero(); t.data.len()]).collect();
        }
        let mut targets = params.tensors_mut();
        if targets.len() != grad_views.len() || targets.len() != self.accumulators.len() {
            return Err(Error::Shape("optimizer state does not match the parameter layout".into()));
        }
        let keep = self.decay;
        let blend = T::one() - self.decay;
        for ((theta, g), acc) in targets.iter_mut().zip(&grad_views).zip(self.accumulators.iter_mut()) {
            if theta.len() != g.data.len() || acc.len() != g.data.len() {
                return Err(Error::Shape(format!("gradient tensor '{}' has the wrong size", g.name)));
            }
            for ((p, &gi), a) in theta.iter_mut().zip(g.data).zip(acc.iter_mut()) {
                *a = keep * *a + blend * gi * gi;
                *p = *p - self.learning_rate * gi / (*a + self.epsilon).sqrt();
            }
        }
        Ok(())
    }
}

/// Rescales `grads` so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<T: Scalar, P: Parameters<T>>(grads: &mut P, max_norm: T) -> T {
    let norm = grads
        .tensors()
        .iter()
        .flat_map(|t| t.data.iter())
        .fold(T::zero(), |acc, &g| acc + g * g)
        .sqrt();
    if norm > max_norm {
        grads.scale(max_norm / norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::TensorView;

    #[derive(Clone)]
    struct Flat(Vec<f64>);

    impl Parameters<f64> for Flat {
        fn tensors(&self) -> Vec<TensorView<'_, f64>> {
            vec![TensorView { name: "x".into(), shape: vec![self.0.len()], data: &self.0 }]
        }
        fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn hand_evaluated_update() {
        let mut theta = Flat(vec![1.0]);
        let mut state = OptimizerState::<f64>::default();
        state.step(&mut theta, &Flat(vec![1.0]), 1).unwrap();
        assert!((state.accumulators()[0][0] - 0.1).abs() < 1e-15);
        let expect = 1.0 - 0.003 / (0.1_f64 + 1e-8).sqrt();
        assert_eq!(theta.0[0], expect);
        assert!((theta.0[0] - 0.99051).abs() < 1e-5);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut theta = Flat(vec![0.5, -2.0, 3.0]);
        let mut state = OptimizerState::<f64>::default();
        state.step(&mut theta, &Flat(vec![0.0; 3]), 1).unwrap();
        assert_eq!(theta.0, vec![0.5, -2.0, 3.0]);
    }

    #[test]
    fn identical_steps_are_deterministic() {
        let run = || {
            let mut theta = Flat(vec![0.3, -0.7]);
            let mut state = OptimizerState::<f64>::default();
            for _ in 0..2 {
                state.step(&mut theta, &Flat(vec![0.2, -1.5]), 1).unwrap();
            }
            theta.0
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn non_finite_gradient_is_training_error() {
        let mut theta = Flat(vec![1.0, 2.0]);
        let mut state = OptimizerState::<f64>::default();
        let err = state.step(&mut theta, &Flat(vec![1.0, f64::NAN]), 7).unwrap_err();
        assert!(matches!(err, Error::Training { epoch: 7, .. }));
        assert_eq!(theta.0, vec![1.0, 2.0]);
    }

    #[test]
    fn clipping_caps_the_norm() {
        let mut g = Flat(vec![3.0, 4.0]);
        let before = clip_global_norm(&mut g, 5.0);
        assert_eq!(before, 5.0);
        assert_eq!(g.0, vec![3.0, 4.0]);
        let mut g = Flat(vec![30.0, 40.0]);
        assert_eq!(clip_global_norm(&mut g, 5.0), 50.0);
        assert!((g.0[0] - 3.0).abs() < 1e-12 && (g.0[1] - 4.0).abs() < 1e-12);
    }
}
