//! Time-series containers, normalization and representative selection.

mod ucr;

pub use ucr::{load_ucr_channels, load_ucr_dir, load_ucr_tsv, write_ucr_tsv};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// One instance: `length` timesteps by `channels` values, stored row-major.
/// Instances in a dataset may differ in length.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    values: Matrix<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(values: Matrix<T>) -> Result<Self> {
        if values.cols() == 0 {
            return Err(Error::Format("a time series needs at least one channel".into()));
        }
        if values.rows() < 2 {
            return Err(Error::Format(format!(
                "a time series needs at least 2 timesteps, got {}",
                values.rows()
            )));
        }
        if !values.is_finite() {
            return Err(Error::Format("time series contains non-finite values".into()));
        }
        Ok(TimeSeries { values })
    }

    pub fn univariate(values: &[T]) -> Result<Self> {
        Self::new(Matrix::from_vec(values.len(), 1, values.to_vec())?)
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    /// Values of one timestep across channels.
    pub fn step(&self, t: usize) -> &[T] {
        self.values.row(t)
    }

    pub fn channel(&self, c: usize) -> Vec<T> {
        self.values.iter_rows().map(|r| r[c]).collect()
    }

    /// Flattened values zero-padded (or truncated) to `len` timesteps.
    pub fn padded_flat(&self, len: usize) -> Vec<T> {
        let d = self.channels();
        let mut out = vec![T::zero(); len * d];
        let keep = self.len().min(len) * d;
        out[..keep].copy_from_slice(&self.values.as_slice()[..keep]);
        out
    }
}

/// A collection of instances with optional integer labels in `0..k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset<T> {
    pub name: String,
    instances: Vec<TimeSeries<T>>,
    labels: Option<Vec<usize>>,
    /// Original label text for each internal class id.
    class_names: Vec<String>,
}

impl<T: Scalar> TimeSeriesDataset<T> {
    /// Builds an unlabeled dataset.
    pub fn unlabeled(name: impl Into<String>, instances: Vec<TimeSeries<T>>) -> Result<Self> {
        let ds = TimeSeriesDataset { name: name.into(), instances, labels: None, class_names: Vec::new() };
        ds.validate()?;
        Ok(ds)
    }

    /// Builds a labeled dataset; labels must already be dense ids in
    /// `0..class_names.len()` and every class must occur.
    pub fn labeled(
        name: impl Into<String>,
        instances: Vec<TimeSeries<T>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let ds = TimeSeriesDataset { name: name.into(), instances, labels: Some(labels), class_names };
        ds.validate()?;
        Ok(ds)
    }

    /// Builds a labeled dataset from arbitrary integer labels, renumbering
    /// them to `0..k` in ascending order of the original value.
    pub fn with_raw_labels(name: impl Into<String>, instances: Vec<TimeSeries<T>>, raw: &[i64]) -> Result<Self> {
        let mut distinct: Vec<i64> = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let labels = raw.iter().map(|v| distinct.binary_search(v).expect("value present")).collect();
        let names = distinct.iter().map(|v| v.to_string()).collect();
        Self::labeled(name, instances, labels, names)
    }

    fn validate(&self) -> Result<()> {
        if self.instances.len() < 2 {
            return Err(Error::Format(format!(
                "dataset '{}' needs at least 2 instances, got {}",
                self.name,
                self.instances.len()
            )));
        }
        let d = self.instances[0].channels();
        if let Some(i) = self.instances.iter().position(|s| s.channels() != d) {
            return Err(Error::Shape(format!("instance {i} has {} channels, expected {d}", self.instances[i].channels())));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.instances.len() {
                return Err(Error::Shape(format!(
                    "{} labels for {} instances",
                    labels.len(),
                    self.instances.len()
                )));
            }
            let k = self.class_names.len();
            let mut seen = vec![false; k];
            for &l in labels {
                if l >= k {
                    return Err(Error::Contract(format!("label {l} outside 0..{k}")));
                }
                seen[l] = true;
            }
            if let Some(c) = seen.iter().position(|s| !s) {
                return Err(Error::Contract(format!("class {c} has no instances")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.instances[0].channels()
    }

    pub fn instances(&self) -> &[TimeSeries<T>] {
        &self.instances
    }

    pub fn instance(&self, i: usize) -> &TimeSeries<T> {
        &self.instances[i]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Number of classes, when labeled.
    pub fn class_count(&self) -> Option<usize> {
        self.labels.as_ref().map(|_| self.class_names.len())
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.instances.iter().map(TimeSeries::len).collect()
    }

    pub fn min_length(&self) -> usize {
        self.instances.iter().map(TimeSeries::len).min().unwrap_or(0)
    }

    pub fn max_length(&self) -> usize {
        self.instances.iter().map(TimeSeries::len).max().unwrap_or(0)
    }

    /// The same instances without labels.
    pub fn without_labels(&self) -> Self {
        TimeSeriesDataset {
            name: self.name.clone(),
            instances: self.instances.clone(),
            labels: None,
            class_names: self.class_names.clone(),
        }
    }

    /// Re-expresses this dataset's labels in the class-id space of
    /// `reference`. Classes unknown to `reference` get ids after its last.
    pub fn align_labels_to(&self, reference: &TimeSeriesDataset<T>) -> Result<Self> {
        let labels = self
            .labels
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("dataset '{}' has no labels to align", self.name)))?;
        let mut names = reference.class_names.clone();
        let mut remap = Vec::with_capacity(self.class_names.len());
        for n in &self.class_names {
            let id = match names.iter().position(|r| r == n) {
                Some(id) => id,
                None => {
                    names.push(n.clone());
                    names.len() - 1
                }
            };
            remap.push(id);
        }
        Ok(TimeSeriesDataset {
            name: self.name.clone(),
            instances: self.instances.clone(),
            labels: Some(labels.iter().map(|&l| remap[l]).collect()),
            class_names: names,
        })
    }
}

/// Z-normalizes every channel of every instance over its own length
/// (population standard deviation). Constant channels become zeros.
pub fn znormalize<T: Scalar>(ds: &TimeSeriesDataset<T>) -> TimeSeriesDataset<T> {
    let instances = ds.instances.iter().map(znormalize_series).collect();
    TimeSeriesDataset {
        name: ds.name.clone(),
        instances,
        labels: ds.labels.clone(),
        class_names: ds.class_names.clone(),
    }
}

fn znormalize_series<T: Scalar>(s: &TimeSeries<T>) -> TimeSeries<T> {
    let (t, d) = (s.len(), s.channels());
    let n = T::from_usize_lossy(t);
    let mut out = s.values.clone();
    for c in 0..d {
        let mean = s.values.iter_rows().map(|r| r[c]).sum::<T>() / n;
        let var = s.values.iter_rows().map(|r| (r[c] - mean) * (r[c] - mean)).sum::<T>() / n;
        let sd = var.sqrt();
        let constant = sd <= T::epsilon() * mean.abs().max(T::one()) * n;
        for i in 0..t {
            out[(i, c)] = if constant { T::zero() } else { (s.values[(i, c)] - mean) / sd };
        }
    }
    TimeSeries { values: out }
}

/// Where a representative instance came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Expert,
    Synthetic,
}

/// The small labeled set seeding label generation. Grows with synthetic
/// instances during self-correction.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeSet<T> {
    instances: Vec<TimeSeries<T>>,
    labels: Vec<usize>,
    origin: Vec<Origin>,
    /// Row in the parent dataset for expert instances.
    source_indices: Vec<Option<usize>>,
    class_count: usize,
}

impl<T: Scalar> RepresentativeSet<T> {
    /// Expert-labeled representatives supplied directly.
    pub fn from_expert(instances: Vec<TimeSeries<T>>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(Error::Shape(format!("{} labels for {} representatives", labels.len(), instances.len())));
        }
        let n = instances.len();
        let set = RepresentativeSet {
            instances,
            labels,
            origin: vec![Origin::Expert; n],
            source_indices: vec![None; n],
            class_count,
        };
        set.check_coverage()?;
        Ok(set)
    }

    fn check_coverage(&self) -> Result<()> {
        let counts = self.class_counts();
        if let Some(l) = self.labels.iter().find(|&&l| l >= self.class_count) {
            return Err(Error::Contract(format!("representative label {l} outside 0..{}", self.class_count)));
        }
        if let Some(c) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!("class {c} has no representative instance")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn instances(&self) -> &[TimeSeries<T>] {
        &self.instances
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origin
    }

    pub fn source_indices(&self) -> &[Option<usize>] {
        &self.source_indices
    }

    pub fn expert_count(&self) -> usize {
        self.origin.iter().filter(|o| **o == Origin::Expert).count()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &l in &self.labels {
            if l < self.class_count {
                counts[l] += 1;
            }
        }
        counts
    }

    /// Expert instances of one class.
    pub fn expert_instances(&self, class: usize) -> Vec<&TimeSeries<T>> {
        self.instances
            .iter()
            .zip(&self.labels)
            .zip(&self.origin)
            .filter(|((_, &l), &o)| l == class && o == Origin::Expert)
            .map(|((s, _), _)| s)
            .collect()
    }

    /// Only the expert part of the pool.
    pub fn experts(&self) -> Self {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.origin[i] == Origin::Expert).collect();
        RepresentativeSet {
            instances: keep.iter().map(|&i| self.instances[i].clone()).collect(),
            labels: keep.iter().map(|&i| self.labels[i]).collect(),
            origin: vec![Origin::Expert; keep.len()],
            source_indices: keep.iter().map(|&i| self.source_indices[i]).collect(),
            class_count: self.class_count,
        }
    }

    /// Adds generated instances carrying the label of their class.
    pub fn push_synthetic(&mut self, instances: Vec<TimeSeries<T>>, class: usize) -> Result<()> {
        if class >= self.class_count {
            return Err(Error::Contract(format!("synthetic class {class} outside 0..{}", self.class_count)));
        }
        for s in instances {
            self.instances.push(s);
            self.labels.push(class);
            self.origin.push(Origin::Synthetic);
            self.source_indices.push(None);
        }
        Ok(())
    }

    /// The representatives as a labeled dataset (for encoding).
    pub fn as_dataset(&self, name: &str) -> Result<TimeSeriesDataset<T>> {
        let names = (0..self.class_count).map(|c| c.to_string()).collect();
        if self.instances.len() < 2 {
            return Err(Error::Format("a representative dataset needs at least 2 instances".into()));
        }
        TimeSeriesDataset::labeled(name, self.instances.clone(), self.labels.clone(), names)
    }
}

/// Draws a stratified random representative subset with an equal number of
/// instances per class (`ceil(fraction * n / k)`, capped at the class size)
/// and returns it with the full dataset stripped of labels.
///
/// `fraction == 1.0` returns the whole labeled set.
pub fn select_representatives<T: Scalar>(
    ds: &TimeSeriesDataset<T>,
    fraction: f64,
    seed: u64,
) -> Result<(RepresentativeSet<T>, TimeSeriesDataset<T>)> {
    let labels = ds
        .labels()
        .ok_or_else(|| Error::Config(format!("dataset '{}' has no labels to draw representatives from", ds.name)))?;
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("representative fraction {fraction} outside (0, 1]")));
    }
    let n = ds.len();
    let k = ds.class_names.len();
    let budget = fraction * n as f64;
    if budget < k as f64 {
        return Err(Error::Config(format!(
            "fraction {fraction} of {n} instances cannot cover {k} classes"
        )));
    }
    let per_class = if fraction == 1.0 { n } else { (budget / k as f64).ceil() as usize };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    for class in 0..k {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        members.truncate(per_class);
        members.sort_unstable();
        chosen.extend(members.into_iter().map(|i| (class, i)));
    }

    let reps = RepresentativeSet {
        instances: chosen.iter().map(|&(_, i)| ds.instances[i].clone()).collect(),
        labels: chosen.iter().map(|&(c, _)| c).collect(),
        origin: vec![Origin::Expert; chosen.len()],
        source_indices: chosen.iter().map(|&(_, i)| Some(i)).collect(),
        class_count: k,
    };
    Ok((reps, ds.without_labels()))
}
