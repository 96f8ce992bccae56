//! k-nearest-neighbour classification on zero-padded raw series.

use rayon::prelude::*;

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Flattens every series, zero-padded to `len` timesteps.
pub fn padded_features<T: Scalar>(series: &[TimeSeries<T>], len: usize) -> Vec<Vec<T>> {
    series.iter().map(|s| s.padded_flat(len)).collect()
}

pub(crate) fn check_channels<T: Scalar>(train: &[TimeSeries<T>], test: &[TimeSeries<T>]) -> Result<usize> {
    let d = train
        .first()
        .map(TimeSeries::channels)
        .ok_or_else(|| Error::Contract("classifier needs a non-empty training set".into()))?;
    if let Some(s) = train.iter().chain(test).find(|s| s.channels() != d) {
        return Err(Error::Shape(format!("series with {} channels among {d}-channel data", s.channels())));
    }
    Ok(d)
}

/// Majority label among the `k` nearest training series (Euclidean
/// distance). Equal distances keep training order; vote ties go to the
/// smallest label.
pub fn knn_classify<T: Scalar>(
    train: &[TimeSeries<T>],
    train_labels: &[usize],
    test: &[TimeSeries<T>],
    k: usize,
) -> Result<Vec<usize>> {
    check_channels(train, test)?;
    if train_labels.len() != train.len() {
        return Err(Error::Contract(format!("{} labels for {} training series", train_labels.len(), train.len())));
    }
    if k == 0 {
        return Err(Error::Config("k for nearest neighbours must be positive".into()));
    }
    let len = train.iter().chain(test).map(TimeSeries::len).max().unwrap_or(0);
    let train_x = padded_features(train, len);
    let classes = train_labels.iter().max().map_or(0, |m| m + 1);
    let k = k.min(train.len());
    Ok(test
        .par_iter()
        .map(|s| {
            let q = s.padded_flat(len);
            let mut dist: Vec<(T, usize)> = train_x
                .iter()
                .enumerate()
                .map(|(i, x)| (x.iter().zip(&q).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b)), i))
                .collect();
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let mut votes = vec![0usize; classes];
            for &(_, i) in &dist[..k] {
                votes[train_labels[i]] += 1;
            }
            let mut best = 0;
            for (c, &v) in votes.iter().enumerate() {
                if v > votes[best] {
                    best = c;
                }
            }
            best
        })
        .collect())
}
