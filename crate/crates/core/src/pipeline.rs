//! End-to-end label generation: representative selection, AECS training
//! and self-correction, all seeded from one run seed.

use log::info;

use crate::aecs::{check_compact_length, train_aecs_with, AecsConfig, AecsModel, DEFAULT_COMPACT_LENGTH, DEFAULT_EPOCHS};
use crate::dataset::{select_representatives, znormalize, RepresentativeSet, TimeSeries, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::labeling::{self_correct, SelfCorrectConfig, SelfCorrectOutcome};
use crate::scalar::Scalar;
use crate::seed::SeedStream;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelOptions {
    pub rep_fraction: f64,
    pub compact_length: usize,
    pub aecs_epochs: usize,
    pub normalize: bool,
    pub seed: u64,
    /// Its `seed` is ignored; the loop seed derives from `seed` above.
    pub self_correct: SelfCorrectConfig,
}

impl Default for LabelOptions {
    fn default() -> Self {
        LabelOptions {
            rep_fraction: 0.15,
            compact_length: DEFAULT_COMPACT_LENGTH,
            aecs_epochs: DEFAULT_EPOCHS,
            normalize: true,
            seed: 42,
            self_correct: SelfCorrectConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabelRun<T> {
    /// The (normalized) training set with labels stripped.
    pub unlabeled: TimeSeriesDataset<T>,
    pub representatives: RepresentativeSet<T>,
    pub model: AecsModel<T>,
    pub outcome: SelfCorrectOutcome<T>,
}

/// Prepares `ds` as the pipeline sees it.
pub fn prepare<T: Scalar>(ds: &TimeSeriesDataset<T>, normalize: bool) -> TimeSeriesDataset<T> {
    if normalize {
        znormalize(ds)
    } else {
        ds.clone()
    }
}

/// Runs the whole labeling pipeline on a labeled dataset, whose labels only
/// serve to simulate the expert annotating the representatives.
pub fn run_labeling<T: Scalar>(ds: &TimeSeriesDataset<T>, options: &LabelOptions) -> Result<LabelRun<T>> {
    check_compact_length(ds.min_length(), options.compact_length)?;
    if ds.labels().is_none() {
        return Err(Error::Config(format!("dataset '{}' has no labels for the expert simulation", ds.name)));
    }
    let seeds = SeedStream::new(options.seed);
    let data = prepare(ds, options.normalize);
    let (reps, x_u) = select_representatives(&data, options.rep_fraction, seeds.derive("representatives"))?;
    info!("selected {} representatives over {} classes", reps.len(), reps.class_count());

    let mut training: Vec<TimeSeries<T>> = x_u.instances().to_vec();
    if options.self_correct.merge {
        training.extend(reps.instances().iter().cloned());
    }
    let aecs_config = AecsConfig {
        compact_length: options.compact_length,
        epochs: options.aecs_epochs,
        seed: seeds.derive("aecs"),
        ..AecsConfig::default()
    };
    let model = train_aecs_with(&training, &aecs_config)?;
    info!(
        "autoencoder trained for {} epochs, loss {:e}",
        model.loss_history.len(),
        model.loss_history.last().map_or(f64::NAN, |l| l.as_f64())
    );

    let config = SelfCorrectConfig { seed: seeds.derive("self-correct"), ..options.self_correct.clone() };
    let outcome = self_correct(&x_u, &reps, &model, &config)?;
    Ok(LabelRun { unlabeled: x_u, representatives: reps, model, outcome })
}
