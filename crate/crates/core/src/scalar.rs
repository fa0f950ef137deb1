//! Scalar abstraction and extended-real values.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point element type of every solver routine: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Sum
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; every literal used in the crate is
    /// representable in both supported types.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// A value of `(-inf, +inf]`. Conjugates and indicator functions may be
/// `+inf`; adding anything to `PosInf` stays `PosInf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal<T> {
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtReal<T> {
    pub fn zero() -> Self {
        ExtReal::Finite(T::zero())
    }

    /// Maps `+inf` to [`ExtReal::PosInf`]; every other value is kept as is.
    pub fn from_scalar(v: T) -> Self {
        if v == T::infinity() {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(v) if v.is_finite())
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// The value as a plain scalar, with `PosInf` becoming `T::infinity()`.
    pub fn to_scalar(&self) -> T {
        match *self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => T::infinity(),
        }
    }

    /// `self - other` where `other` is finite; `PosInf` stays `PosInf`.
    pub fn minus(&self, other: T) -> Self {
        match *self {
            ExtReal::Finite(v) => ExtReal::Finite(v - other),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl<T: Scalar> Add for ExtReal<T> {
    type Output = ExtReal<T>;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl<T: Scalar> Add<T> for ExtReal<T> {
    type Output = ExtReal<T>;

    fn add(self, rhs: T) -> Self {
        self + ExtReal::Finite(rhs)
    }
}

impl<T: Scalar> Sum for ExtReal<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtReal::zero(), |acc, v| acc + v)
    }
}

impl<T: Scalar> PartialOrd for ExtReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl<T: Scalar> fmt::Display for ExtReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_saturates() {
        let a = ExtReal::Finite(2.0_f64);
        assert_eq!(a + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf + 1.0, ExtReal::PosInf);
        assert_eq!(a + 3.0, ExtReal::Finite(5.0));
        let s: ExtReal<f64> = [a, ExtReal::PosInf, a].into_iter().sum();
        assert_eq!(s, ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf.minus(1.0_f32), ExtReal::PosInf);
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Finite(1e300_f64) < ExtReal::PosInf);
        assert_eq!(ExtReal::from_scalar(f64::INFINITY), ExtReal::PosInf);
        assert_eq!(ExtReal::<f32>::PosInf.to_scalar(), f32::INFINITY);
        assert_eq!(format!("{}", ExtReal::<f64>::PosInf), "inf");
    }
}
