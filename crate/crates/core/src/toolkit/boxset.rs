use crate::scalar::{ExtReal, Scalar};

use super::error::{check_dim, ToolkitError};

/// Axis-aligned box `{x : lower <= x <= upper}`. Bounds may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSet<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> BoxSet<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self, ToolkitError> {
        check_dim(lower.len(), upper.len())?;
        for (m, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || *l == T::infinity() || *u == T::neg_infinity()
            {
                return Err(ToolkitError::InvalidParameter(format!(
                    "empty box in coordinate {m}: [{l}, {u}]"
                )));
            }
        }
        Ok(BoxSet { lower, upper })
    }

    /// One-dimensional interval `[lower, upper]`.
    pub fn interval(lower: T, upper: T) -> Result<Self, ToolkitError> {
        Self::new(vec![lower], vec![upper])
    }

    /// The same interval in every coordinate.
    pub fn cube(dim: usize, lower: T, upper: T) -> Result<Self, ToolkitError> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| l <= v && v <= u)
    }

    /// Euclidean projection (componentwise clamp).
    pub fn project(&self, u: &[T]) -> Vec<T> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &h))| v.max(l).min(h))
            .collect()
    }

    /// `None` when the intersection is empty.
    pub fn intersect(&self, other: &BoxSet<T>) -> Option<BoxSet<T>> {
        if self.dim() != other.dim() {
            return None;
        }
        let lower = self
            .lower
            .iter()
            .zip(&other.lower)
            .map(|(a, b)| a.max(*b))
            .collect();
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a.min(*b))
            .collect();
        BoxSet::new(lower, upper).ok()
    }

    /// Support function `sup_{x in box} <y, x>`, i.e. the conjugate of the
    /// box indicator.
    pub fn support(&self, y: &[T]) -> ExtReal<T> {
        let mut total = T::zero();
        for (&v, (&l, &u)) in y.iter().zip(self.lower.iter().zip(&self.upper)) {
            let term = if v > T::zero() {
                v * u
            } else if v < T::zero() {
                v * l
            } else {
                T::zero()
            };
            if term == T::infinity() {
                return ExtReal::PosInf;
            }
            total = total + term;
        }
        ExtReal::Finite(total)
    }

    pub fn is_bounded(&self) -> bool {
        self.lower
            .iter()
            .chain(&self.upper)
            .all(|v| v.is_finite())
    }
}

/// Effective domain of a function: all of `R^M` or a box.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain<T> {
    Whole,
    Box(BoxSet<T>),
}

impl<T: Scalar> Domain<T> {
    pub fn contains(&self, x: &[T]) -> bool {
        match self {
            Domain::Whole => x.iter().all(|v| v.is_finite()),
            Domain::Box(b) => b.contains(x),
        }
    }

    pub fn as_box(&self) -> Option<&BoxSet<T>> {
        match self {
            Domain::Whole => None,
            Domain::Box(b) => Some(b),
        }
    }

    /// Bounds of coordinate `m` (infinite for `Whole`).
    pub fn bounds(&self, m: usize) -> (T, T) {
        match self {
            Domain::Whole => (T::neg_infinity(), T::infinity()),
            Domain::Box(b) => (b.lower()[m], b.upper()[m]),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        self.as_box().map(BoxSet::dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_boxes() {
        assert!(BoxSet::new(vec![1.0_f64], vec![0.0]).is_err());
        assert!(BoxSet::new(vec![f64::NAN], vec![0.0]).is_err());
        assert!(BoxSet::new(vec![0.0_f64], vec![0.0, 1.0]).is_err());
        assert!(BoxSet::new(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).is_ok());
    }

    #[test]
    fn support_function() {
        let b = BoxSet::new(vec![-1.0_f64, 0.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(b.support(&[1.0, -1.0]), ExtReal::Finite(2.0));
        assert_eq!(b.support(&[-1.0, 1.0]), ExtReal::Finite(4.0));
        let half = BoxSet::new(vec![0.0_f64], vec![f64::INFINITY]).unwrap();
        assert_eq!(half.support(&[1.0]), ExtReal::PosInf);
        assert_eq!(half.support(&[0.0]), ExtReal::Finite(0.0));
        assert_eq!(half.support(&[-2.0]), ExtReal::Finite(0.0));
    }

    #[test]
    fn intersection() {
        let a = BoxSet::new(vec![0.0_f64], vec![3.0]).unwrap();
        let b = BoxSet::new(vec![1.0_f64], vec![5.0]).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), BoxSet::interval(1.0, 3.0).unwrap());
        let c = BoxSet::new(vec![4.0_f64], vec![5.0]).unwrap();
        assert!(a.intersect(&c).is_none());
    }
}
