//! Principal component projection for plotting embeddings.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{covariance, symmetric_eigen};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Pca<T> {
    pub mean: Vec<T>,
    /// Loadings as columns, by decreasing variance.
    pub components: Matrix<T>,
    pub variances: Vec<T>,
}

impl<T: Scalar> Pca<T> {
    /// Keeps `count` components (at most the column count). Each
    /// component's first non-negligible loading is made positive.
    pub fn fit(x: &Matrix<T>, count: usize) -> Result<Self> {
        let p = x.cols();
        if x.rows() == 0 || p == 0 {
            return Err(Error::Shape("PCA of an empty matrix".into()));
        }
        let (values, vectors) = symmetric_eigen(&covariance(x))?;
        let keep = count.min(p);
        let mut components = Matrix::zeros(p, keep);
        for c in 0..keep {
            let col: Vec<T> = (0..p).map(|r| vectors[(r, c)]).collect();
            let scale = col.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            let flip = col.iter().find(|v| v.abs() > scale * T::lit(1e-9)).is_some_and(|v| *v < T::zero());
            for (r, v) in col.into_iter().enumerate() {
                components[(r, c)] = if flip { -v } else { v };
            }
        }
        Ok(Pca { mean: x.column_means(), components, variances: values[..keep].to_vec() })
    }

    /// Scores of the rows of `x`. Components whose variance is negligible
    /// next to the largest one score exactly zero.
    pub fn transform(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let mut centered = x.clone();
        for r in 0..centered.rows() {
            for (v, &m) in centered.row_mut(r).iter_mut().zip(&self.mean) {
                *v = *v - m;
            }
        }
        let mut scores = centered.matmul(&self.components)?;
        let top = self.variances.first().copied().unwrap_or(T::zero());
        for (c, &var) in self.variances.iter().enumerate() {
            if !(var > top * T::lit(1e-12)) {
                for r in 0..scores.rows() {
                    scores[(r, c)] = T::zero();
                }
            }
        }
        Ok(scores)
    }

    pub fn inverse_transform(&self, scores: &Matrix<T>) -> Result<Matrix<T>> {
        let mut x = scores.matmul(&self.components.transpose())?;
        for r in 0..x.rows() {
            for (v, &m) in x.row_mut(r).iter_mut().zip(&self.mean) {
                *v = *v + m;
            }
        }
        Ok(x)
    }
}

/// Two-dimensional projection; a single-column input gets a zero second
/// coordinate.
pub fn project_2d<T: Scalar>(x: &Matrix<T>) -> Result<Matrix<T>> {
    let pca = Pca::fit(x, 2)?;
    let scores = pca.transform(x)?;
    if scores.cols() == 2 {
        return Ok(scores);
    }
    let mut out = Matrix::zeros(x.rows(), 2);
    for r in 0..x.rows() {
        out[(r, 0)] = scores[(r, 0)];
    }
    Ok(out)
}

/// Writes `x,y,label` rows (with a header) for the 2-D projection of `x`.
pub fn export_embedding_2d<T: Scalar>(x: &Matrix<T>, labels: &[String], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if labels.len() != x.rows() {
        return Err(Error::Contract(format!("{} labels for {} embeddings", labels.len(), x.rows())));
    }
    let xy = project_2d(x)?;
    let mut out = String::from("x,y,label\n");
    for (r, label) in labels.iter().enumerate() {
        out.push_str(&format!("{:.6},{:.6},{label}\n", xy[(r, 0)].as_f64(), xy[(r, 1)].as_f64()));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identical_rows_collapse() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]).unwrap();
        let xy = project_2d(&x).unwrap();
        assert!(xy.as_slice().iter().all(|&v| v == xy[(0, 0)] || v == xy[(0, 1)]));
        assert_eq!(xy.row(0), xy.row(2));
    }

    #[test]
    fn rank_one_has_zero_second_axis() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0], [0.5, 1.0]]).unwrap();
        let xy = project_2d(&x).unwrap();
        assert!((0..4).all(|r| xy[(r, 1)] == 0.0));
        let pca = Pca::fit(&x, 2).unwrap();
        assert!(pca.components[(0, 0)] > 0.0);
    }

    #[test]
    fn full_rank_reconstruction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(50);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let pca = Pca::fit(&x, 12).unwrap();
        let back = pca.inverse_transform(&pca.transform(&x).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_layout() {
        let x = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [2.0, 2.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        export_embedding_2d(&x, &["a".into(), "b".into(), "a".into()], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "x,y,label");
        assert!(lines[1].ends_with(",a") && lines[1].split(',').count() == 3);
        assert!(export_embedding_2d(&x, &["a".into()], &path).is_err());
    }
}
