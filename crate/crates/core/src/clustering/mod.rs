//! HC-AECS: hierarchical clustering of compact sequences under several
//! distance measures, ranked by the modified Hubert statistic.

pub mod distance;
pub mod hierarchical;
pub mod hubert;

pub use distance::{DistanceMeasure, MahalanobisMetric, MeasureKind};
pub use hierarchical::{hierarchical_cluster, Dendrogram, Linkage, Merge};
pub use hubert::{best_clustering, modified_hubert, modified_hubert_with, select_best, RankedClustering};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult<T> {
    /// Cluster of each row, in `0..k`.
    pub assignments: Vec<usize>,
    /// Mean of the member rows of each cluster.
    pub centroids: Matrix<T>,
    pub measure: DistanceMeasure<T>,
    pub hubert: T,
    pub k: usize,
    pub dendrogram: Option<Dendrogram>,
}

impl<T: Scalar> ClusteringResult<T> {
    /// Computes centroids for the given partition. Every cluster must be
    /// non-empty. The Hubert score starts at zero.
    pub fn from_assignments(x: &Matrix<T>, assignments: Vec<usize>, k: usize, measure: DistanceMeasure<T>) -> Result<Self> {
        if assignments.len() != x.rows() {
            return Err(Error::Contract(format!("{} assignments for {} rows", assignments.len(), x.rows())));
        }
        let mut sums = Matrix::zeros(k, x.cols());
        let mut counts = vec![0usize; k];
        for (row, &a) in x.iter_rows().zip(&assignments) {
            if a >= k {
                return Err(Error::Contract(format!("assignment {a} outside 0..{k}")));
            }
            counts[a] += 1;
            for (s, &v) in sums.row_mut(a).iter_mut().zip(row) {
                *s = *s + v;
            }
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Contract(format!("cluster {empty} has no members")));
        }
        for (c, &count) in counts.iter().enumerate() {
            let n = T::from_usize_lossy(count);
            for s in sums.row_mut(c) {
                *s = *s / n;
            }
        }
        Ok(ClusteringResult { assignments, centroids: sums, measure, hubert: T::zero(), k, dendrogram: None })
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == cluster).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}
