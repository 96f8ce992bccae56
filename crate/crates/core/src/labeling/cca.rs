//! Cluster-class association: each cluster takes the most frequent class
//! among the representatives whose nearest centroid it is.

use serde::{Deserialize, Serialize};

use crate::aecs::{encode_instances, AecsModel, CompactMatrix};
use crate::clustering::{best_clustering, ClusteringResult, Linkage, RankedClustering};
use crate::dataset::{RepresentativeSet, TimeSeriesDataset};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Generated labels for the unlabeled set, tagged with the self-correction
/// iteration that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    pub labels: Vec<usize>,
    pub iteration: usize,
}

impl LabelVector {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Fraction of positions agreeing with `truth`.
    pub fn accuracy(&self, truth: &[usize]) -> Result<f64> {
        if truth.len() != self.labels.len() || truth.is_empty() {
            return Err(Error::Contract(format!("{} labels compared with {} references", self.labels.len(), truth.len())));
        }
        let hits = self.labels.iter().zip(truth).filter(|(a, b)| a == b).count();
        Ok(hits as f64 / truth.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationTrace<T> {
    /// Distance from each centroid (row) to each representative (column).
    pub dist: Matrix<T>,
    /// Nearest cluster of each representative.
    pub rep_clus: Vec<usize>,
    pub class_of_cluster: Vec<usize>,
    /// Labels of the representatives mapped to each cluster.
    pub y_ins: Vec<Vec<usize>>,
    /// Clusters no representative mapped to; they take the class of the
    /// representative nearest their centroid.
    pub fallback_clusters: Vec<usize>,
}

/// Most frequent value; ties go to the smallest.
pub fn mode(values: &[usize]) -> Option<usize> {
    let max = *values.iter().max()?;
    let mut counts = vec![0usize; max + 1];
    for &v in values {
        counts[v] += 1;
    }
    let mut best = 0;
    for (v, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = v;
        }
    }
    Some(best)
}

/// Associates clusters with classes using the clustering's own distance
/// measure. Returns the class of every clustered row and the trace.
pub fn associate<T: Scalar>(
    clustering: &ClusteringResult<T>,
    rep_embeddings: &Matrix<T>,
    rep_labels: &[usize],
    class_count: usize,
) -> Result<(Vec<usize>, AssociationTrace<T>)> {
    let k = clustering.k;
    let m = rep_embeddings.rows();
    if rep_labels.len() != m {
        return Err(Error::Contract(format!("{} labels for {m} representatives", rep_labels.len())));
    }
    if m == 0 {
        return Err(Error::Contract("no representatives to associate".into()));
    }
    if let Some(&bad) = rep_labels.iter().find(|&&l| l >= class_count) {
        return Err(Error::Contract(format!("representative label {bad} outside 0..{class_count}")));
    }
    let measure = &clustering.measure;
    let mut dist = Matrix::zeros(k, m);
    for c in 0..k {
        for r in 0..m {
            dist[(c, r)] = measure.distance(clustering.centroids.row(c), rep_embeddings.row(r))?;
        }
    }
    let mut rep_clus = Vec::with_capacity(m);
    for r in 0..m {
        let mut best = 0;
        for c in 1..k {
            if dist[(c, r)] < dist[(best, r)] {
                best = c;
            }
        }
        rep_clus.push(best);
    }
    let mut y_ins = vec![Vec::new(); k];
    for (r, &c) in rep_clus.iter().enumerate() {
        y_ins[c].push(rep_labels[r]);
    }
    let mut class_of_cluster = Vec::with_capacity(k);
    let mut fallback_clusters = Vec::new();
    for (c, ys) in y_ins.iter().enumerate() {
        match mode(ys) {
            Some(class) => class_of_cluster.push(class),
            None => {
                let mut nearest = 0;
                for r in 1..m {
                    if dist[(c, r)] < dist[(c, nearest)] {
                        nearest = r;
                    }
                }
                class_of_cluster.push(rep_labels[nearest]);
                fallback_clusters.push(c);
            }
        }
    }
    let labels = clustering.assignments.iter().map(|&a| class_of_cluster[a]).collect();
    Ok((labels, AssociationTrace { dist, rep_clus, class_of_cluster, y_ins, fallback_clusters }))
}

/// Embeddings and clustering shared by every association round.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredSpace<T> {
    /// AECS of the unlabeled instances.
    pub unlabeled: CompactMatrix<T>,
    /// AECS of the expert representatives.
    pub experts: CompactMatrix<T>,
    /// Whether the experts were clustered together with the unlabeled rows
    /// (they follow them, in order).
    pub merged: bool,
    pub ranked: RankedClustering<T>,
}

impl<T: Scalar> ClusteredSpace<T> {
    /// Encodes both sets and clusters into `class_count` clusters.
    pub fn build(
        x_u: &TimeSeriesDataset<T>,
        reps: &RepresentativeSet<T>,
        model: &AecsModel<T>,
        linkage: Linkage,
        merge: bool,
    ) -> Result<Self> {
        let experts = reps.experts();
        let unlabeled = encode_instances(model, x_u.instances())?;
        let expert_codes = encode_instances(model, experts.instances())?;
        let data = if merge {
            unlabeled.embeddings.vstack(&expert_codes.embeddings)?
        } else {
            unlabeled.embeddings.clone()
        };
        let ranked = best_clustering(&data, reps.class_count(), linkage)?;
        Ok(ClusteredSpace { unlabeled, experts: expert_codes, merged: merge, ranked })
    }

    pub fn clustering(&self) -> &ClusteringResult<T> {
        &self.ranked.best
    }
}

/// Result of one association round.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaOutcome<T> {
    pub labels: LabelVector,
    pub trace: AssociationTrace<T>,
    pub space: ClusteredSpace<T>,
}

/// Encodes, clusters and associates. Only the labels of `x_u` are
/// returned, even when the representatives were clustered alongside.
pub fn cluster_class_associate<T: Scalar>(
    x_u: &TimeSeriesDataset<T>,
    reps: &RepresentativeSet<T>,
    model: &AecsModel<T>,
    linkage: Linkage,
    merge: bool,
) -> Result<CcaOutcome<T>> {
    let space = ClusteredSpace::build(x_u, reps, model, linkage, merge)?;
    let rep_codes = encode_instances(model, reps.instances())?;
    let (all, trace) = associate(space.clustering(), &rep_codes.embeddings, reps.labels(), reps.class_count())?;
    let labels = LabelVector { labels: all[..x_u.len()].to_vec(), iteration: 1 };
    Ok(CcaOutcome { labels, trace, space })
}
