//! The three distance measures compared by HC-AECS.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, covariance, spd_inverse};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Tag of a distance measure. The declaration order is also the tie-break
/// order used when two measures score the same.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Chebyshev,
    Manhattan,
    Mahalanobis,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [MeasureKind::Chebyshev, MeasureKind::Manhattan, MeasureKind::Mahalanobis];

    pub fn abbreviation(self) -> &'static str {
        match self {
            MeasureKind::Chebyshev => "CH",
            MeasureKind::Manhattan => "MN",
            MeasureKind::Mahalanobis => "ML",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Chebyshev => "chebyshev",
            MeasureKind::Manhattan => "manhattan",
            MeasureKind::Mahalanobis => "mahalanobis",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chebyshev" | "ch" => Ok(MeasureKind::Chebyshev),
            "manhattan" | "mn" | "ma" => Ok(MeasureKind::Manhattan),
            "mahalanobis" | "ml" => Ok(MeasureKind::Mahalanobis),
            other => Err(Error::Config(format!("unknown distance measure '{other}'"))),
        }
    }
}

/// Mahalanobis metric `sqrt((a-b)ᵀ S (a-b))` for a symmetric positive
/// definite `S` (the inverse covariance).
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisMetric<T> {
    inv_cov: Matrix<T>,
    /// Lower Cholesky factor `R` of `S`, so the distance is `|Rᵀ(a-b)|`.
    factor: Matrix<T>,
}

impl<T: Scalar> MahalanobisMetric<T> {
    pub fn from_inverse_covariance(inv_cov: Matrix<T>) -> Result<Self> {
        let factor = cholesky(&inv_cov)?;
        Ok(MahalanobisMetric { inv_cov, factor })
    }

    pub fn identity(p: usize) -> Self {
        MahalanobisMetric { inv_cov: Matrix::identity(p), factor: Matrix::identity(p) }
    }

    /// Covariance of the rows of `x` with a ridge of `1e-6 * trace / p`
    /// added to the diagonal. Data with zero spread gets the identity.
    pub fn fit(x: &Matrix<T>) -> Result<Self> {
        let p = x.cols();
        if p == 0 {
            return Err(Error::Shape("cannot fit a metric on zero columns".into()));
        }
        let mut cov = covariance(x);
        let trace = (0..p).fold(T::zero(), |acc, i| acc + cov[(i, i)]);
        if !(trace > T::zero()) {
            return Ok(Self::identity(p));
        }
        let ridge = T::lit(1e-6) * trace / T::from_usize_lossy(p);
        for i in 0..p {
            cov[(i, i)] = cov[(i, i)] + ridge;
        }
        Self::from_inverse_covariance(spd_inverse(&cov)?)
    }

    pub fn dimension(&self) -> usize {
        self.inv_cov.rows()
    }

    pub fn inverse_covariance(&self) -> &Matrix<T> {
        &self.inv_cov
    }

    pub fn distance(&self, a: &[T], b: &[T]) -> T {
        let p = self.dimension();
        let diff: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
        let mut q = T::zero();
        for i in 0..p {
            let mut s = T::zero();
            for j in 0..p {
                s = s + self.inv_cov[(i, j)] * diff[j];
            }
            q = q + diff[i] * s;
        }
        q.max(T::zero()).sqrt()
    }

    /// Rows mapped to a space where this metric is Euclidean.
    pub fn whiten(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        x.matmul(&self.factor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistanceMeasure<T> {
    Chebyshev,
    Manhattan,
    Mahalanobis(MahalanobisMetric<T>),
}

impl<T: Scalar> DistanceMeasure<T> {
    /// The measure of the given kind for data `x`; Mahalanobis fits its
    /// covariance on `x`.
    pub fn for_data(kind: MeasureKind, x: &Matrix<T>) -> Result<Self> {
        Ok(match kind {
            MeasureKind::Chebyshev => DistanceMeasure::Chebyshev,
            MeasureKind::Manhattan => DistanceMeasure::Manhattan,
            MeasureKind::Mahalanobis => DistanceMeasure::Mahalanobis(MahalanobisMetric::fit(x)?),
        })
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            DistanceMeasure::Chebyshev => MeasureKind::Chebyshev,
            DistanceMeasure::Manhattan => MeasureKind::Manhattan,
            DistanceMeasure::Mahalanobis(_) => MeasureKind::Mahalanobis,
        }
    }

    pub fn distance(&self, a: &[T], b: &[T]) -> Result<T> {
        if a.len() != b.len() {
            return Err(Error::Shape(format!("vectors of length {} and {}", a.len(), b.len())));
        }
        Ok(match self {
            DistanceMeasure::Chebyshev => a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())),
            DistanceMeasure::Manhattan => a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + (x - y).abs()),
            DistanceMeasure::Mahalanobis(metric) => {
                if metric.dimension() != a.len() {
                    return Err(Error::Shape(format!(
                        "metric is {}-dimensional, vectors have length {}",
                        metric.dimension(),
                        a.len()
                    )));
                }
                metric.distance(a, b)
            }
        })
    }

    /// Full symmetric `n x n` distance matrix between the rows of `x`.
    pub fn pairwise(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        let n = x.rows();
        let mut d = Matrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.distance(x.row(i), x.row(j))?;
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        Ok(d)
    }
}
