use std::ops::{Index, IndexMut};

use ndarray::linalg::general_mat_mul;
use ndarray::{ArrayView2, ArrayViewMut2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape(format!("row {i} has {} columns, expected {cols}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// Appends the rows of `other` below `self`.
    pub fn vstack(&self, other: &Matrix<T>) -> Result<Self> {
        if self.rows > 0 && other.rows > 0 && self.cols != other.cols {
            return Err(Error::Shape(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let cols = if self.rows > 0 { self.cols } else { other.cols };
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols, data })
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: indices.len(), cols: self.cols, data }
    }

    /// Column means; zeros for an empty matrix.
    pub fn column_means(&self) -> Vec<T> {
        let mut mean = vec![T::zero(); self.cols];
        if self.rows == 0 {
            return mean;
        }
        for r in self.iter_rows() {
            for (m, &v) in mean.iter_mut().zip(r) {
                *m = *m + v;
            }
        }
        let n = T::from_usize_lossy(self.rows);
        mean.iter_mut().for_each(|m| *m = *m / n);
        mean
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// `c <- alpha * op(a) * op(b) + beta * c`, where `op` optionally
/// transposes. Dispatches to an optimized kernel for `f32` / `f64`.
pub fn gemm<T: Scalar>(
    alpha: T,
    a: &Matrix<T>,
    transpose_a: bool,
    b: &Matrix<T>,
    transpose_b: bool,
    beta: T,
    c: &mut Matrix<T>,
) -> Result<()> {
    let av = ArrayView2::from_shape((a.rows, a.cols), &a.data).expect("matrix shape matches storage");
    let bv = ArrayView2::from_shape((b.rows, b.cols), &b.data).expect("matrix shape matches storage");
    let av = if transpose_a { av.reversed_axes() } else { av };
    let bv = if transpose_b { bv.reversed_axes() } else { bv };
    if av.ncols() != bv.nrows() || av.nrows() != c.rows || bv.ncols() != c.cols {
        return Err(Error::Shape(format!(
            "gemm: {:?} x {:?} into {}x{}",
            av.dim(),
            bv.dim(),
            c.rows,
            c.cols
        )));
    }
    let (rows, cols) = (c.rows, c.cols);
    let mut cv = ArrayViewMut2::from_shape((rows, cols), &mut c.data).expect("matrix shape matches storage");
    general_mat_mul(alpha, &av, &bv, beta, &mut cv);
    Ok(())
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_and_transpose() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let at = a.transpose();
        let g = at.matmul(&a).unwrap();
        assert_eq!(g.as_slice(), &[35.0, 44.0, 44.0, 56.0]);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn gemm_transposes() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let b = Matrix::from_rows(&[[1.0, 0.5], [-1.0, 2.0]]).unwrap();
        let mut c = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        gemm(1.0, &a, false, &b, true, 2.0, &mut c).unwrap();
        let expect = a.matmul(&b.transpose()).unwrap();
        for (x, y) in c.as_slice().iter().zip(expect.as_slice()) {
            assert_eq!(*x, y + 2.0);
        }
        let mut g64 = Matrix::zeros(2, 2);
        gemm(1.0, &a, true, &a, false, 0.0, &mut g64).unwrap();
        assert_eq!(g64.as_slice(), &[35.0, 44.0, 44.0, 56.0]);
        let mut g = Matrix::<f32>::zeros(3, 3);
        assert!(gemm(1.0_f32, &Matrix::zeros(3, 2), false, &Matrix::zeros(3, 2), false, 0.0, &mut g).is_err());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(Matrix::from_rows(&rows), Err(Error::Shape(_))));
    }

    #[test]
    fn vstack_and_select() {
        let a = Matrix::from_rows(&[[1.0_f32, 2.0]]).unwrap();
        let b = Matrix::from_rows(&[[3.0_f32, 4.0], [5.0, 6.0]]).unwrap();
        let s = a.vstack(&b).unwrap();
        assert_eq!(s.rows(), 3);
        assert_eq!(s.select_rows(&[2, 0]).as_slice(), &[5.0, 6.0, 1.0, 2.0]);
        assert_eq!(s.column_means(), vec![3.0, 4.0]);
    }
}
