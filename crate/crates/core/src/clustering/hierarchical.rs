//! Agglomerative clustering with Lance-Williams distance updates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::distance::DistanceMeasure;
use super::ClusteringResult;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        })
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(Error::Config(format!("unknown linkage '{other}'"))),
        }
    }
}

/// One agglomeration step. Clusters are named by their smallest member
/// index; `left < right`, and the merged cluster keeps the name `left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub step: usize,
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Full merge sequence of `n` points (`n - 1` merges).
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub points: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Builds the complete merge tree. Ties on the linkage distance merge
    /// the lexicographically smallest `(left, right)` pair first.
    pub fn build<T: Scalar>(x: &Matrix<T>, measure: &DistanceMeasure<T>, linkage: Linkage) -> Result<Self> {
        let n = x.rows();
        let mut d = measure.pairwise(x)?;
        let mut size = vec![1usize; n];
        let mut active = vec![true; n];
        let mut merges = Vec::with_capacity(n.saturating_sub(1));
        for step in 0..n.saturating_sub(1) {
            let mut best: Option<(T, usize, usize)> = None;
            for i in 0..n {
                if !active[i] {
                    continue;
                }
                for j in (i + 1)..n {
                    if active[j] && best.is_none_or(|(b, _, _)| d[(i, j)] < b) {
                        best = Some((d[(i, j)], i, j));
                    }
                }
            }
            let (height, a, b) = best.expect("two active clusters remain");
            if !height.is_finite() {
                return Err(Error::Numeric(format!("non-finite linkage distance at merge {step}")));
            }
            let (sa, sb) = (T::from_usize_lossy(size[a]), T::from_usize_lossy(size[b]));
            for c in 0..n {
                if !active[c] || c == a || c == b {
                    continue;
                }
                let v = match linkage {
                    Linkage::Single => d[(a, c)].min(d[(b, c)]),
                    Linkage::Complete => d[(a, c)].max(d[(b, c)]),
                    Linkage::Average => (sa * d[(a, c)] + sb * d[(b, c)]) / (sa + sb),
                };
                d[(a, c)] = v;
                d[(c, a)] = v;
            }
            size[a] += size[b];
            active[b] = false;
            merges.push(Merge { step, left: a, right: b, height: height.as_f64() });
        }
        Ok(Dendrogram { points: n, merges })
    }

    /// Flat assignment into `k` clusters, numbered by smallest member.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.points;
        if k == 0 || k > n {
            return Err(Error::Config(format!("cannot cut {n} points into {k} clusters")));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        for m in &self.merges[..n - k] {
            parent[m.right] = m.left;
        }
        // Merged names always point to a smaller index, so one forward pass
        // resolves every root.
        let mut root = vec![0usize; n];
        for i in 0..n {
            root[i] = if parent[i] == i { i } else { root[parent[i]] };
        }
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut out = vec![0usize; n];
        for i in 0..n {
            let r = root[i];
            if label[r] == usize::MAX {
                label[r] = next;
                next += 1;
            }
            out[i] = label[r];
        }
        Ok(out)
    }

    /// `[[step, left, right, height], ...]`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.merges
                .iter()
                .map(|m| serde_json::json!([m.step, m.left, m.right, m.height]))
                .collect(),
        )
    }
}

/// Agglomerative clustering of the rows of `x` cut at `k` clusters. The
/// returned Hubert score is computed with a Mahalanobis metric fitted on `x`.
pub fn hierarchical_cluster<T: Scalar>(
    x: &Matrix<T>,
    k: usize,
    measure: &DistanceMeasure<T>,
    linkage: Linkage,
) -> Result<ClusteringResult<T>> {
    if k == 0 || k > x.rows() {
        return Err(Error::Config(format!("cannot form {k} clusters from {} instances", x.rows())));
    }
    let dendrogram = Dendrogram::build(x, measure, linkage)?;
    let assignments = dendrogram.cut(k)?;
    let mut result = ClusteringResult::from_assignments(x, assignments, k, measure.clone())?;
    if x.rows() >= 2 {
        result.hubert = super::hubert::modified_hubert(x, &result)?;
    }
    result.dendrogram = Some(dendrogram);
    Ok(result)
}
