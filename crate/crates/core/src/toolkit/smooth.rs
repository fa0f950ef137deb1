use crate::linalg::dot;
use crate::scalar::{ExtReal, Scalar};

use super::error::{check_dim, ToolkitError};
use super::{Domain, PiecewiseQuadraticUtility, QuadraticFunction};

#[derive(Clone, Debug, PartialEq)]
pub enum SmoothBase<T> {
    Quadratic(QuadraticFunction<T>),
    Utility(PiecewiseQuadraticUtility<T>),
}

/// Smooth part `f_i` of an agent's cost together with the effective domain
/// it is restricted to. The conjugate `f^*(u) = sup_x u^T x - f(x)` and its
/// gradient (the maximizer) are evaluated over that domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothConjugable<T> {
    base: SmoothBase<T>,
    domain: Domain<T>,
    strong_convexity: T,
}

impl<T: Scalar> SmoothConjugable<T> {
    /// Quadratic smooth part; the modulus is the smallest curvature
    /// eigenvalue.
    pub fn quadratic(f: QuadraticFunction<T>, domain: Domain<T>) -> Result<Self, ToolkitError> {
        if let Some(d) = domain.dim() {
            check_dim(f.dim(), d)?;
        }
        let sigma = f.strong_convexity();
        Ok(SmoothConjugable {
            base: SmoothBase::Quadratic(f),
            domain,
            strong_convexity: sigma,
        })
    }

    /// Negated saturating utility. Only the quadratic branch is curved, so
    /// the modulus is reported as `2 s`; a box domain keeps the conjugate
    /// finite.
    pub fn utility(
        f: PiecewiseQuadraticUtility<T>,
        domain: Domain<T>,
    ) -> Result<Self, ToolkitError> {
        if let Some(d) = domain.dim() {
            check_dim(1, d)?;
        }
        let sigma = T::lit(2.0) * f.curvature();
        Ok(SmoothConjugable {
            base: SmoothBase::Utility(f),
            domain,
            strong_convexity: sigma,
        })
    }

    pub fn base(&self) -> &SmoothBase<T> {
        &self.base
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn strong_convexity(&self) -> T {
        self.strong_convexity
    }

    pub fn dim(&self) -> usize {
        match &self.base {
            SmoothBase::Quadratic(q) => q.dim(),
            SmoothBase::Utility(_) => 1,
        }
    }

    /// `f(x)`, `+inf` outside the effective domain.
    pub fn value(&self, x: &[T]) -> ExtReal<T> {
        if x.len() != self.dim() || !self.domain.contains(x) {
            return ExtReal::PosInf;
        }
        ExtReal::Finite(match &self.base {
            SmoothBase::Quadratic(q) => q.value(x),
            SmoothBase::Utility(u) => u.value(x[0]),
        })
    }

    /// `grad f^*(u)`: the unique maximizer of `u^T x - f(x)` over the
    /// effective domain.
    pub fn conjugate_argmax(&self, u: &[T]) -> Result<Vec<T>, ToolkitError> {
        check_dim(self.dim(), u.len())?;
        match &self.base {
            SmoothBase::Quadratic(q) => q.conjugate_argmax(&self.domain, u),
            SmoothBase::Utility(f) => {
                let (lo, hi) = self.domain.bounds(0);
                Ok(vec![f.conjugate_argmax(u[0], lo, hi)?])
            }
        }
    }

    /// `f^*(u)`; `+inf` when the supremum is unbounded.
    pub fn conjugate_value(&self, u: &[T]) -> Result<ExtReal<T>, ToolkitError> {
        match self.conjugate_argmax(u) {
            Ok(x) => Ok(match self.value(&x) {
                ExtReal::Finite(v) => ExtReal::Finite(dot(u, &x) - v),
                ExtReal::PosInf => ExtReal::PosInf,
            }),
            Err(ToolkitError::Unbounded) => Ok(ExtReal::PosInf),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::BoxSet;

    #[test]
    fn quadratic_on_whole_space() {
        // 1/2 * 2 x^2 + x
        let f = SmoothConjugable::quadratic(
            QuadraticFunction::scalar(1.0_f64, 1.0, 0.0).unwrap(),
            Domain::Whole,
        )
        .unwrap();
        assert_eq!(f.conjugate_argmax(&[5.0]).unwrap(), vec![2.0]);
        assert_eq!(f.conjugate_value(&[5.0]).unwrap(), ExtReal::Finite(4.0));
        assert_eq!(f.strong_convexity(), 2.0);
    }

    #[test]
    fn half_square_conjugate_at_zero() {
        let f = SmoothConjugable::quadratic(
            QuadraticFunction::scalar(0.5_f64, 0.0, 0.0).unwrap(),
            Domain::Whole,
        )
        .unwrap();
        assert_eq!(f.conjugate_value(&[0.0]).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn box_clamps_stationary_point() {
        let f = SmoothConjugable::quadratic(
            QuadraticFunction::scalar(0.0074_f64, 3.53, 0.0).unwrap(),
            Domain::Box(BoxSet::interval(0.0, 150.0).unwrap()),
        )
        .unwrap();
        assert_eq!(f.conjugate_argmax(&[3.53]).unwrap(), vec![0.0]);
        assert_eq!(f.conjugate_argmax(&[100.0]).unwrap(), vec![150.0]);
    }

    #[test]
    fn utility_without_box_is_unbounded_for_positive_slope() {
        let f = SmoothConjugable::utility(
            PiecewiseQuadraticUtility::new(17.17_f64, 0.0935).unwrap(),
            Domain::Whole,
        )
        .unwrap();
        assert_eq!(f.conjugate_argmax(&[0.5]), Err(ToolkitError::Unbounded));
        assert_eq!(f.conjugate_value(&[0.5]).unwrap(), ExtReal::PosInf);
        assert!(f.conjugate_value(&[-1.0]).unwrap().is_finite());
    }

    #[test]
    fn value_is_infinite_off_domain() {
        let f = SmoothConjugable::quadratic(
            QuadraticFunction::scalar(1.0_f64, 0.0, 0.0).unwrap(),
            Domain::Box(BoxSet::interval(0.0, 1.0).unwrap()),
        )
        .unwrap();
        assert_eq!(f.value(&[2.0]), ExtReal::PosInf);
        assert_eq!(f.value(&[0.5]), ExtReal::Finite(0.25));
    }
}
