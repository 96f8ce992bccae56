//! CART classification tree with Gini impurity.

use crate::dataset::TimeSeries;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::knn::{check_channels, padded_features};

pub const DEFAULT_MAX_DEPTH: usize = 10;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

/// A fitted tree. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    root: Node,
    features: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

impl DecisionTree {
    /// Grows the tree on rows `x` until nodes are pure, unsplittable, or at
    /// `max_depth`. Impure nodes split even when the best Gini gain is zero;
    /// ties prefer the lowest feature, then the lowest threshold.
    pub fn fit(x: &[Vec<f64>], labels: &[usize], max_depth: usize) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Contract("decision tree needs a non-empty training set".into()));
        }
        if labels.len() != x.len() {
            return Err(Error::Contract(format!("{} labels for {} rows", labels.len(), x.len())));
        }
        let features = x[0].len();
        if x.iter().any(|r| r.len() != features) {
            return Err(Error::Shape("training rows differ in width".into()));
        }
        let classes = labels.iter().max().map_or(0, |m| m + 1);
        let idx: Vec<usize> = (0..x.len()).collect();
        let root = grow(x, labels, classes, idx, 0, max_depth);
        Ok(DecisionTree { root, features })
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(c) => return *c,
                Node::Split { feature, threshold, left, right } => {
                    let v = row.get(*feature).copied().unwrap_or(0.0);
                    node = if v <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn d(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + d(left).max(d(right)),
            }
        }
        d(&self.root)
    }

    pub fn feature_count(&self) -> usize {
        self.features
    }
}

fn grow(x: &[Vec<f64>], labels: &[usize], classes: usize, idx: Vec<usize>, depth: usize, max_depth: usize) -> Node {
    let mut counts = vec![0usize; classes];
    for &i in &idx {
        counts[labels[i]] += 1;
    }
    let n = idx.len();
    let parent = gini(&counts, n);
    if depth >= max_depth || parent == 0.0 || n < 2 {
        return Node::Leaf(majority(&counts));
    }
    let mut best: Option<(f64, usize, f64)> = None;
    let features = x[idx[0]].len();
    let mut order = idx.clone();
    for f in 0..features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; classes];
        let mut right = counts.clone();
        for pos in 0..n - 1 {
            let i = order[pos];
            left[labels[i]] += 1;
            right[labels[i]] -= 1;
            let (a, b) = (x[i][f], x[order[pos + 1]][f]);
            if a == b {
                continue;
            }
            let nl = pos + 1;
            let weighted = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
            let gain = parent - weighted;
            if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                best = Some((gain, f, a + (b - a) / 2.0));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return Node::Leaf(majority(&counts));
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x[i][feature] <= threshold);
    Node::Split {
        feature,
        threshold,
        left: Box::new(grow(x, labels, classes, l, depth + 1, max_depth)),
        right: Box::new(grow(x, labels, classes, r, depth + 1, max_depth)),
    }
}

/// Fits a tree on series padded or truncated to the longest training
/// series and predicts the test series.
pub fn decision_tree_classify<T: Scalar>(
    train: &[TimeSeries<T>],
    train_labels: &[usize],
    test: &[TimeSeries<T>],
    max_depth: usize,
) -> Result<Vec<usize>> {
    check_channels(train, test)?;
    let len = train.iter().map(TimeSeries::len).max().unwrap_or(0);
    let to_f64 = |rows: Vec<Vec<T>>| -> Vec<Vec<f64>> {
        rows.into_iter().map(|r| r.into_iter().map(|v| v.as_f64()).collect()).collect()
    };
    let tree = DecisionTree::fit(&to_f64(padded_features(train, len)), train_labels, max_depth)?;
    Ok(to_f64(padded_features(test, len)).iter().map(|r| tree.predict_row(r)).collect())
}
