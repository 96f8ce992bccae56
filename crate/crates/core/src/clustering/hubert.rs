//! Modified Hubert statistic: the average over unordered instance pairs of
//! the Mahalanobis distance between the two instances times the
//! Mahalanobis distance between their cluster centroids.

use super::distance::{DistanceMeasure, MahalanobisMetric, MeasureKind};
use super::hierarchical::{hierarchical_cluster, Linkage};
use super::ClusteringResult;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Hubert score of `result` on `x`, with the metric fitted on `x`.
pub fn modified_hubert<T: Scalar>(x: &Matrix<T>, result: &ClusteringResult<T>) -> Result<T> {
    let metric = MahalanobisMetric::fit(x)?;
    modified_hubert_with(x, &result.assignments, &result.centroids, &metric)
}

pub fn modified_hubert_with<T: Scalar>(
    x: &Matrix<T>,
    assignments: &[usize],
    centroids: &Matrix<T>,
    metric: &MahalanobisMetric<T>,
) -> Result<T> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::Contract(format!("Hubert statistic needs at least 2 instances, got {n}")));
    }
    if assignments.len() != n {
        return Err(Error::Contract(format!("{} assignments for {n} instances", assignments.len())));
    }
    if let Some(&bad) = assignments.iter().find(|&&a| a >= centroids.rows()) {
        return Err(Error::Contract(format!("assignment {bad} has no centroid")));
    }
    let w = metric.whiten(x)?;
    let wc = metric.whiten(centroids)?;
    let k = centroids.rows();
    let mut center = Matrix::zeros(k, k);
    for a in 0..k {
        for b in (a + 1)..k {
            let v = euclidean(wc.row(a), wc.row(b));
            center[(a, b)] = v;
            center[(b, a)] = v;
        }
    }
    let mut total = T::zero();
    for i in 0..n {
        let mut row = T::zero();
        for j in (i + 1)..n {
            let c = center[(assignments[i], assignments[j])];
            if c != T::zero() {
                row = row + euclidean(w.row(i), w.row(j)) * c;
            }
        }
        total = total + row;
    }
    Ok(T::lit(2.0) * total / (T::from_usize_lossy(n) * T::from_usize_lossy(n - 1)))
}

fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y) * (x - y)).sqrt()
}

/// The clustering chosen by [`best_clustering`] and the score of every
/// candidate, in Chebyshev, Manhattan, Mahalanobis order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedClustering<T> {
    pub best: ClusteringResult<T>,
    pub scores: Vec<(MeasureKind, T)>,
}

/// Index of the highest score; the earliest entry wins ties.
pub fn select_best<T: Scalar>(scores: &[(MeasureKind, T)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &(_, s)) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b].1) {
            best = Some(i);
        }
    }
    best
}

/// Clusters `x` under each measure and keeps the one with the highest
/// Hubert score.
pub fn best_clustering<T: Scalar>(x: &Matrix<T>, k: usize, linkage: Linkage) -> Result<RankedClustering<T>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 clusters, got {k}")));
    }
    let results: Vec<ClusteringResult<T>> = {
        use rayon::prelude::*;
        MeasureKind::ALL
            .par_iter()
            .map(|&kind| hierarchical_cluster(x, k, &DistanceMeasure::for_data(kind, x)?, linkage))
            .collect::<Result<_>>()?
    };
    let scores: Vec<(MeasureKind, T)> = results.iter().map(|r| (r.measure.kind(), r.hubert)).collect();
    let pick = select_best(&scores).expect("three candidates");
    let best = results.into_iter().nth(pick).expect("index in range");
    Ok(RankedClustering { best, scores })
}
