//! Small dense routines for p x p symmetric matrices (p is the compact
//! length, typically 12).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Sample covariance (divisor n - 1) of the rows of `x`.
/// A single row yields the zero matrix.
pub fn covariance<T: Scalar>(x: &Matrix<T>) -> Matrix<T> {
    let p = x.cols();
    let mean = x.column_means();
    let mut cov = Matrix::zeros(p, p);
    if x.rows() < 2 {
        return cov;
    }
    let mut centered = vec![T::zero(); p];
    for r in x.iter_rows() {
        for (c, (&v, &m)) in centered.iter_mut().zip(r.iter().zip(&mean)) {
            *c = v - m;
        }
        for i in 0..p {
            for j in i..p {
                cov[(i, j)] = cov[(i, j)] + centered[i] * centered[j];
            }
        }
    }
    let denom = T::from_usize_lossy(x.rows() - 1);
    for i in 0..p {
        for j in i..p {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Lower-triangular `L` with `a = L Lᵀ`.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!("cholesky needs a square matrix, got {}x{}", n, a.cols())));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag = diag - l[(j, k)] * l[(j, k)];
        }
        if !(diag > T::zero()) || !diag.is_finite() {
            return Err(Error::Numeric(format!(
                "matrix is not positive definite (pivot {j} = {diag})"
            )));
        }
        let d = diag.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix with nonzero diagonal.
pub fn invert_lower<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for col in 0..n {
        // Forward substitution on e_col.
        for i in col..n {
            let mut s = if i == col { T::one() } else { T::zero() };
            for k in col..i {
                s = s - l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv
}

/// Inverse of a symmetric positive-definite matrix.
pub fn spd_inverse<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let l_inv = invert_lower(&cholesky(a)?);
    // a⁻¹ = L⁻ᵀ L⁻¹
    let mut inv = l_inv.transpose().matmul(&l_inv)?;
    let n = inv.rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (inv[(i, j)] + inv[(j, i)]) / T::lit(2.0);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching eigenvectors as
/// the columns of the second matrix.
pub fn symmetric_eigen<T: Scalar>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!("eigen-decomposition needs a square matrix, got {}x{}", n, a.cols())));
    }
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..n {
            scale = scale + m[(i, i)] * m[(i, i)];
            for j in (i + 1)..n {
                off = off + m[(i, j)] * m[(i, j)];
            }
        }
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps index order among equal eigenvalues.
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok((values, vectors))
}
