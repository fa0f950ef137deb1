use crate::linalg::{self, dot, Mat};
use crate::scalar::Scalar;

use super::error::{check_dim, ToolkitError};
use super::Domain;

/// `f(x) = 1/2 x^T Q x + q^T x + r` with symmetric positive semidefinite `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFunction<T> {
    curvature: Mat<T>,
    linear: Vec<T>,
    offset: T,
}

impl<T: Scalar> QuadraticFunction<T> {
    pub fn new(curvature: Mat<T>, linear: Vec<T>, offset: T) -> Result<Self, ToolkitError> {
        if !curvature.is_square() {
            return Err(ToolkitError::InvalidParameter(format!(
                "curvature must be square, got {:?}",
                curvature.shape()
            )));
        }
        check_dim(curvature.rows(), linear.len())?;
        let scale = curvature
            .as_slice()
            .iter()
            .fold(T::one(), |a, v| a.max(v.abs()));
        if !curvature.is_symmetric(T::lit(1e-12) * scale) {
            return Err(ToolkitError::InvalidParameter(
                "curvature must be symmetric".into(),
            ));
        }
        Ok(QuadraticFunction {
            curvature,
            linear,
            offset,
        })
    }

    /// One-dimensional `kappa x^2 + linear x + offset`; the curvature entry
    /// is `2 kappa`.
    pub fn scalar(kappa: T, linear: T, offset: T) -> Result<Self, ToolkitError> {
        Self::new(
            Mat::scalar(T::lit(2.0) * kappa),
            vec![linear],
            offset,
        )
    }

    /// Separable `sum_m 1/2 d_m x_m^2 + q_m x_m + r`.
    pub fn diagonal(d: Vec<T>, linear: Vec<T>, offset: T) -> Result<Self, ToolkitError> {
        Self::new(Mat::from_diagonal(&d), linear, offset)
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn curvature(&self) -> &Mat<T> {
        &self.curvature
    }

    pub fn linear(&self) -> &[T] {
        &self.linear
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn is_separable(&self) -> bool {
        self.curvature.is_diagonal()
    }

    pub fn value(&self, x: &[T]) -> T {
        let qx = self.curvature.matvec(x);
        T::lit(0.5) * dot(x, &qx) + dot(&self.linear, x) + self.offset
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = self.curvature.matvec(x);
        for (gi, &li) in g.iter_mut().zip(&self.linear) {
            *gi = *gi + li;
        }
        g
    }

    /// Smallest eigenvalue of the curvature.
    pub fn strong_convexity(&self) -> T {
        linalg::min_eigenvalue(&self.curvature)
    }

    /// Maximizer of `u^T x - f(x)` over `domain`.
    pub(crate) fn conjugate_argmax(
        &self,
        domain: &Domain<T>,
        u: &[T],
    ) -> Result<Vec<T>, ToolkitError> {
        check_dim(self.dim(), u.len())?;
        let shifted: Vec<T> = u.iter().zip(&self.linear).map(|(&a, &b)| a - b).collect();
        if self.is_separable() {
            let d = self.curvature.diagonal();
            return (0..self.dim())
                .map(|m| {
                    let (lo, hi) = domain.bounds(m);
                    separable_argmax(shifted[m], d[m], lo, hi)
                })
                .collect();
        }
        match domain {
            Domain::Whole => linalg::solve_spd(&self.curvature, &shifted).ok_or(ToolkitError::Unbounded),
            Domain::Box(_) => Err(ToolkitError::Unsupported(
                "conjugate argmax of a coupled quadratic over a box".into(),
            )),
        }
    }

    /// `argmin_v f(v) + |v - u|^2 / (2 alpha)`.
    pub(crate) fn prox(&self, u: &[T], alpha: T) -> Result<Vec<T>, ToolkitError> {
        check_dim(self.dim(), u.len())?;
        let inv = T::one() / alpha;
        let rhs: Vec<T> = u
            .iter()
            .zip(&self.linear)
            .map(|(&a, &b)| a * inv - b)
            .collect();
        if self.is_separable() {
            let d = self.curvature.diagonal();
            return Ok(rhs.iter().zip(&d).map(|(&r, &dm)| r / (dm + inv)).collect());
        }
        let mut system = self.curvature.clone();
        for m in 0..self.dim() {
            system[(m, m)] = system[(m, m)] + inv;
        }
        linalg::solve_spd(&system, &rhs).ok_or_else(|| {
            ToolkitError::InvalidParameter("curvature is not positive semidefinite".into())
        })
    }
}

/// Maximizer of `a x - d x^2 / 2` over `[lo, hi]`.
fn separable_argmax<T: Scalar>(a: T, d: T, lo: T, hi: T) -> Result<T, ToolkitError> {
    if d > T::zero() {
        return Ok((a / d).max(lo).min(hi));
    }
    if d < T::zero() {
        return Err(ToolkitError::InvalidParameter(
            "negative curvature".into(),
        ));
    }
    // linear objective
    let pick = if a > T::zero() {
        hi
    } else if a < T::zero() || lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        T::zero()
    };
    if pick.is_finite() {
        Ok(pick)
    } else {
        Err(ToolkitError::Unbounded)
    }
}
