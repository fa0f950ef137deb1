//! Small dense vectors and matrices.
//!
//! Agents hold tiny blocks (a few rows and columns), so the solver works on
//! plain slices and a row-major [`Mat`]. Factorizations (SVD, eigenvalues,
//! Cholesky) are delegated to `nalgebra` in double precision.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Mat { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Returns `None` for ragged input.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = rows.iter().flatten().copied().collect();
        Some(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, T::one())
    }

    pub fn scaled_identity(n: usize, s: T) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// A 1x1 matrix.
    pub fn scalar(v: T) -> Self {
        Mat {
            rows: 1,
            cols: 1,
            data: vec![v],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == T::zero())
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)] == T::zero()))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|r| (0..r).all(|c| (self[(r, c)] - self[(c, r)]).abs() <= tol))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// `A x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `y += alpha * A x` without allocating.
    pub fn matvec_acc(&self, alpha: T, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = *yr + alpha * dot(self.row(r), x);
        }
    }

    /// `y += alpha * A^T x` without allocating.
    pub fn tr_matvec_acc(&self, alpha: T, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        for (r, &xr) in x.iter().enumerate() {
            let s = alpha * xr;
            for (yc, &a) in y.iter_mut().zip(self.row(r)) {
                *yc = *yc + s * a;
            }
        }
    }

    /// `A^T x`.
    pub fn tr_matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.cols];
        self.tr_matvec_acc(T::one(), x, &mut y);
        y
    }

    pub fn matmul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == T::zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] = out[(r, c)] + a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    /// Columns `start..start + width` as a new matrix.
    pub fn column_block(&self, start: usize, width: usize) -> Mat<T> {
        let mut out = Mat::zeros(self.rows, width);
        for r in 0..self.rows {
            for c in 0..width {
                out[(r, c)] = self[(r, start + c)];
            }
        }
        out
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|v| v.as_f64()))
    }

    pub fn from_f64(m: &DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        let mut out = Mat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out[(r, c)] = T::lit(m[(r, c)]);
            }
        }
        out
    }

    pub fn map_scalar<U: Scalar>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    dot(a, a)
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

pub fn dist_sq<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| {
        let d = x - y;
        acc + d * d
    })
}

pub fn dist_inf<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scaled<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(m: &Mat<T>) -> T {
    if m.rows() == 0 || m.cols() == 0 {
        return T::zero();
    }
    let sv = m.to_f64().singular_values();
    T::lit(sv.iter().fold(0.0_f64, |a, &b| a.max(b)))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Scalar>(m: &Mat<T>) -> T {
    if m.is_diagonal() {
        return m
            .diagonal()
            .into_iter()
            .fold(T::infinity(), |a, b| a.min(b));
    }
    let eig = m.to_f64().symmetric_eigen();
    T::lit(eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
}

/// Solves `A x = b` for symmetric positive definite `A`; `None` when the
/// Cholesky factorization fails.
pub fn solve_spd<T: Scalar>(a: &Mat<T>, b: &[T]) -> Option<Vec<T>> {
    let chol = a.to_f64().cholesky()?;
    let rhs = DVector::from_iterator(b.len(), b.iter().map(|v| v.as_f64()));
    let x = chol.solve(&rhs);
    Some(x.iter().map(|&v| T::lit(v)).collect())
}

/// Numerical rank using singular values above `tol * max(sv)`.
pub fn rank<T: Scalar>(m: &Mat<T>, tol: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let sv = m.to_f64().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree() {
        let a = Mat::from_rows(&[vec![1.0, 2.0, 0.0], vec![-1.0, 0.5, 3.0]]).unwrap();
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 2.5]);
        assert_eq!(a.tr_matvec(&[1.0, 2.0]), a.transpose().matvec(&[1.0, 2.0]));
        let mut y = vec![1.0, 1.0];
        a.matvec_acc(-1.0, &[0.0, 0.0, 1.0], &mut y);
        assert_eq!(y, vec![1.0, -2.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Mat::from_rows(&[vec![1.0_f64], vec![1.0, 2.0]]).is_none());
    }

    #[test]
    fn factorizations() {
        let a = Mat::from_rows(&[vec![-1.0_f64, -1.0, 0.0], vec![1.0, 0.0, 0.5]]).unwrap();
        assert_eq!(rank(&a, 1e-12), 2);
        let z = Mat::from_rows(&[vec![0.0_f64, 0.0]]).unwrap();
        assert_eq!(rank(&z, 1e-12), 0);
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        let s = Mat::from_rows(&[vec![2.0_f64, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((min_eigenvalue(&s) - 1.0).abs() < 1e-12);
        assert!((spectral_norm(&s) - 3.0).abs() < 1e-12);
        let x = solve_spd(&s, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        let neg = Mat::from_rows(&[vec![-1.0_f64]]).unwrap();
        assert!(solve_spd(&neg, &[1.0]).is_none());
    }
}
