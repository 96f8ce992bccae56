//! Seeded three-class benchmark: sine, square-wave and linear-trend
//! prototypes with additive Gaussian noise.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{TimeSeries, TimeSeriesDataset};
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub per_class: usize,
    pub length: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { per_class: 80, length: 64, noise_sd: 0.2, seed: 42 }
    }
}

/// Noise-free value of class `class` at step `s` of `len`.
pub fn prototype(class: usize, s: usize, len: usize) -> f64 {
    let phase = s as f64 / len as f64;
    match class {
        0 => (2.0 * std::f64::consts::PI * 2.0 * phase).sin(),
        1 => {
            if (4.0 * phase).fract() < 0.5 {
                1.0
            } else {
                -1.0
            }
        }
        _ => 2.0 * phase - 1.0,
    }
}

/// Generates the benchmark with instances in shuffled order.
/// Labels are named "1", "2", "3" for sine, square and trend.
pub fn benchmark<T: Scalar>(spec: &SyntheticSpec) -> Result<TimeSeriesDataset<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).expect("noise_sd is finite and non-negative");
    let mut order: Vec<usize> = (0..3 * spec.per_class).map(|i| i / spec.per_class).collect();
    order.shuffle(&mut rng);
    let mut instances = Vec::with_capacity(order.len());
    for &class in &order {
        let values: Vec<T> = (0..spec.length)
            .map(|s| T::lit(prototype(class, s, spec.length) + noise.sample(&mut rng)))
            .collect();
        instances.push(TimeSeries::univariate(&values)?);
    }
    let raw: Vec<i64> = order.iter().map(|&c| c as i64 + 1).collect();
    TimeSeriesDataset::with_raw_labels(format!("synthetic-{}", spec.seed), instances, &raw)
}
