//! Self-correction: grow the representative pool with VAE samples and
//! re-associate until consecutive label vectors agree within τ.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cca::{associate, AssociationTrace, ClusteredSpace, LabelVector};
use super::discriminator::{label_discriminator, Reward, DEFAULT_TAU};
use super::vae::{sample_vae, train_vae_with, VaeConfig, VaeModel};
use crate::aecs::{encode_instances, AecsModel};
use crate::clustering::{Linkage, MeasureKind};
use crate::dataset::{RepresentativeSet, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::SeedStream;

pub const DEFAULT_MAX_ITERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCorrectConfig {
    pub tau: f64,
    pub max_iterations: usize,
    pub linkage: Linkage,
    /// Cluster the expert representatives together with the unlabeled set.
    pub merge: bool,
    pub vae: VaeConfig,
    pub seed: u64,
}

impl Default for SelfCorrectConfig {
    fn default() -> Self {
        SelfCorrectConfig {
            tau: DEFAULT_TAU,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            linkage: Linkage::Average,
            merge: true,
            vae: VaeConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pool_size: usize,
    pub mismatch: f64,
    pub reward: Reward,
    pub hubert: f64,
    pub measure: MeasureKind,
}

#[derive(Debug, Clone)]
pub struct SelfCorrectOutcome<T> {
    /// Labels of the last executed iteration.
    pub labels: LabelVector,
    pub log: Vec<IterationRecord>,
    /// Labels of every iteration, oldest first.
    pub history: Vec<LabelVector>,
    /// Whether the loop stopped on a zero reward rather than the cap.
    pub saturated: bool,
    pub pool: RepresentativeSet<T>,
    pub space: ClusteredSpace<T>,
    pub trace: AssociationTrace<T>,
}

/// Number of synthetic samples per class: `total / k` each, the remainder
/// going to the lowest classes.
pub fn per_class_quota(total: usize, classes: usize) -> Vec<usize> {
    (0..classes).map(|c| total / classes + usize::from(c < total % classes)).collect()
}

pub fn self_correct<T: Scalar>(
    x_u: &TimeSeriesDataset<T>,
    reps: &RepresentativeSet<T>,
    model: &AecsModel<T>,
    config: &SelfCorrectConfig,
) -> Result<SelfCorrectOutcome<T>> {
    if config.max_iterations == 0 {
        return Err(Error::Config("max_iterations must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&config.tau) {
        return Err(Error::Config(format!("tau must lie in [0, 1), got {}", config.tau)));
    }
    let seeds = SeedStream::new(config.seed);
    let k = reps.class_count();
    let mut pool = reps.experts();
    let m = pool.len();
    let space = ClusteredSpace::build(x_u, &pool, model, config.linkage, config.merge)?;
    let n = x_u.len();
    let measure = space.clustering().measure.kind();
    let hubert = space.clustering().hubert.as_f64();
    let mut pool_codes = space.experts.embeddings.clone();

    let mut history: Vec<LabelVector> = Vec::new();
    let mut log = Vec::new();
    let mut vaes: Option<Vec<VaeModel<T>>> = None;
    let mut saturated = false;
    let mut last_trace;
    let mut iteration = 1;
    loop {
        if iteration > 1 {
            if vaes.is_none() {
                vaes = Some(train_class_vaes(&pool, k, &config.vae, &seeds)?);
            }
            let models = vaes.as_ref().expect("trained above");
            let quota = per_class_quota(m, k);
            let samples: Vec<_> = models
                .par_iter()
                .zip(&quota)
                .map(|(vae, &count)| {
                    let seed = seeds.derive(&format!("vae-sample-{iteration}-{}", vae.class_id));
                    sample_vae(vae, count, seed)
                })
                .collect::<Result<_>>()?;
            for (class, batch) in samples.into_iter().enumerate() {
                if batch.is_empty() {
                    continue;
                }
                let codes = encode_instances(model, &batch)?;
                pool_codes = pool_codes.vstack(&codes.embeddings)?;
                pool.push_synthetic(batch, class)?;
            }
        }
        let (all, trace) = associate(space.clustering(), &pool_codes, pool.labels(), k)?;
        last_trace = trace;
        let current = LabelVector { labels: all[..n].to_vec(), iteration };
        let (mismatch, reward) = label_discriminator(&current, history.last(), config.tau)?;
        info!("iteration {iteration}: pool {} mismatch {mismatch:.4} reward {}", pool.len(), reward.value());
        log.push(IterationRecord { iteration, pool_size: pool.len(), mismatch, reward, hubert, measure });
        history.push(current);
        if reward == Reward::Saturated {
            saturated = true;
            break;
        }
        if iteration >= config.max_iterations {
            break;
        }
        iteration += 1;
    }
    let labels = history.last().expect("at least one iteration").clone();
    Ok(SelfCorrectOutcome { labels, log, history, saturated, pool, space, trace: last_trace })
}

fn train_class_vaes<T: Scalar>(
    pool: &RepresentativeSet<T>,
    k: usize,
    base: &VaeConfig,
    seeds: &SeedStream,
) -> Result<Vec<VaeModel<T>>> {
    (0..k)
        .into_par_iter()
        .map(|class| {
            let config = VaeConfig { seed: seeds.derive(&format!("vae-init-{class}")), ..base.clone() };
            train_vae_with(pool, class, &config)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quota_preserves_total() {
        assert_eq!(per_class_quota(8, 3), vec![3, 3, 2]);
        assert_eq!(per_class_quota(24, 3), vec![8, 8, 8]);
        assert_eq!(per_class_quota(2, 3), vec![1, 1, 0]);
    }
}
