use crate::scalar::Scalar;

use super::error::ToolkitError;
use super::CANDIDATE_TIE_TOL;

/// Negated saturating utility of an energy user:
///
/// `f(x) = s x^2 - p x` for `x <= p / (2 s)` and `-p^2 / (4 s)` beyond,
///
/// with price `p > 0` and curvature `s > 0`. `f` is convex and continuously
/// differentiable (its derivative vanishes at the threshold from both sides)
/// but flat past the threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseQuadraticUtility<T> {
    price: T,
    curvature: T,
}

impl<T: Scalar> PiecewiseQuadraticUtility<T> {
    pub fn new(price: T, curvature: T) -> Result<Self, ToolkitError> {
        if !(price > T::zero() && price.is_finite()) {
            return Err(ToolkitError::InvalidParameter(format!(
                "utility price must be positive, got {price}"
            )));
        }
        if !(curvature > T::zero() && curvature.is_finite()) {
            return Err(ToolkitError::InvalidParameter(format!(
                "utility curvature must be positive, got {curvature}"
            )));
        }
        Ok(PiecewiseQuadraticUtility { price, curvature })
    }

    pub fn price(&self) -> T {
        self.price
    }

    pub fn curvature(&self) -> T {
        self.curvature
    }

    /// Saturation point `p / (2 s)`.
    pub fn threshold(&self) -> T {
        self.price / (T::lit(2.0) * self.curvature)
    }

    /// Value of the saturated branch, `-p^2 / (4 s)`.
    pub fn floor(&self) -> T {
        -(self.price * self.price) / (T::lit(4.0) * self.curvature)
    }

    pub fn value(&self, x: T) -> T {
        if x <= self.threshold() {
            self.curvature * x * x - self.price * x
        } else {
            self.floor()
        }
    }

    pub fn derivative(&self, x: T) -> T {
        if x <= self.threshold() {
            T::lit(2.0) * self.curvature * x - self.price
        } else {
            T::zero()
        }
    }

    /// Maximizer of `u x - f(x)` over `[lo, hi]`, chosen from the finite
    /// candidate set {clipped stationary point of the quadratic branch,
    /// branch endpoints, interval endpoints} by comparing objective values.
    pub(crate) fn conjugate_argmax(&self, u: T, lo: T, hi: T) -> Result<T, ToolkitError> {
        if hi == T::infinity() && u > T::zero() {
            return Err(ToolkitError::Unbounded);
        }
        let th = self.threshold();
        let mut candidates: Vec<T> = Vec::with_capacity(6);
        // quadratic branch on [lo, min(hi, th)]
        let q_hi = hi.min(th);
        if lo <= q_hi {
            let stationary = (u + self.price) / (T::lit(2.0) * self.curvature);
            candidates.push(stationary.max(lo).min(q_hi));
            candidates.push(q_hi);
            if lo.is_finite() {
                candidates.push(lo);
            }
        }
        // flat branch on [max(lo, th), hi]: linear objective, ends only
        let c_lo = lo.max(th);
        if c_lo <= hi {
            candidates.push(c_lo);
            if hi.is_finite() {
                candidates.push(hi);
            }
        }
        let objective = |x: T| u * x - self.value(x);
        let tie = T::lit(CANDIDATE_TIE_TOL);
        let mut best = candidates[0];
        let mut best_val = objective(best);
        for &x in &candidates[1..] {
            let v = objective(x);
            if v > best_val + tie || ((v - best_val).abs() <= tie && x < best) {
                best = x;
                best_val = v;
            }
        }
        Ok(best)
    }
}
