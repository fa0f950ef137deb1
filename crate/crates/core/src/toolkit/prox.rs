use crate::scalar::{ExtReal, Scalar};

use super::error::{check_dim, ToolkitError};
use super::{BoxSet, Domain, QuadraticFunction};

/// `sign(v) * max(|v| - t, 0)`.
pub fn soft_threshold<T: Scalar>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

/// Proximal mapping of `weight * |.|_1` with parameter `alpha`.
pub fn prox_l1<T: Scalar>(u: &[T], alpha: T, weight: T) -> Vec<T> {
    let t = alpha * weight;
    u.iter().map(|&v| soft_threshold(v, t)).collect()
}

/// Euclidean projection onto a box.
pub fn project_box<T: Scalar>(u: &[T], b: &BoxSet<T>) -> Vec<T> {
    b.project(u)
}

/// Nonsmooth functions with closed-form proximal mappings and conjugates.
#[derive(Clone, Debug, PartialEq)]
pub enum ProxFriendly<T> {
    Zero,
    L1 { weight: T },
    IndicatorBox(BoxSet<T>),
    L1PlusBox { weight: T, bounds: BoxSet<T> },
    Quadratic(QuadraticFunction<T>),
}

impl<T: Scalar> ProxFriendly<T> {
    pub fn l1(weight: T) -> Result<Self, ToolkitError> {
        if !(weight >= T::zero() && weight.is_finite()) {
            return Err(ToolkitError::InvalidParameter(format!(
                "l1 weight must be nonnegative, got {weight}"
            )));
        }
        Ok(ProxFriendly::L1 { weight })
    }

    /// Intrinsic dimension, if the function carries one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ProxFriendly::Zero | ProxFriendly::L1 { .. } => None,
            ProxFriendly::IndicatorBox(b) | ProxFriendly::L1PlusBox { bounds: b, .. } => {
                Some(b.dim())
            }
            ProxFriendly::Quadratic(q) => Some(q.dim()),
        }
    }

    fn check(&self, len: usize) -> Result<(), ToolkitError> {
        match self.dim() {
            Some(d) => check_dim(d, len),
            None => Ok(()),
        }
    }

    /// Whether a box constraint is already part of the function.
    pub fn has_box(&self) -> bool {
        matches!(
            self,
            ProxFriendly::IndicatorBox(_) | ProxFriendly::L1PlusBox { .. }
        )
    }

    pub fn value(&self, x: &[T]) -> ExtReal<T> {
        match self {
            ProxFriendly::Zero => ExtReal::zero(),
            ProxFriendly::L1 { weight } => {
                ExtReal::Finite(*weight * x.iter().fold(T::zero(), |a, v| a + v.abs()))
            }
            ProxFriendly::IndicatorBox(b) => {
                if b.contains(x) {
                    ExtReal::zero()
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFriendly::L1PlusBox { weight, bounds } => {
                if bounds.contains(x) {
                    ExtReal::Finite(*weight * x.iter().fold(T::zero(), |a, v| a + v.abs()))
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFriendly::Quadratic(q) => {
                if x.len() == q.dim() {
                    ExtReal::Finite(q.value(x))
                } else {
                    ExtReal::PosInf
                }
            }
        }
    }

    /// `prox^alpha_g[u] = argmin_v g(v) + |v - u|^2 / (2 alpha)`.
    pub fn prox(&self, u: &[T], alpha: T) -> Result<Vec<T>, ToolkitError> {
        check_alpha(alpha)?;
        self.check(u.len())?;
        Ok(match self {
            ProxFriendly::Zero => u.to_vec(),
            ProxFriendly::L1 { weight } => prox_l1(u, alpha, *weight),
            ProxFriendly::IndicatorBox(b) => b.project(u),
            // in one dimension the box clamp composes with the shrinkage
            ProxFriendly::L1PlusBox { weight, bounds } => bounds.project(&prox_l1(u, alpha, *weight)),
            ProxFriendly::Quadratic(q) => q.prox(u, alpha)?,
        })
    }

    /// `g^*(y) = sup_x y^T x - g(x)` in closed form.
    pub fn conjugate_value(&self, y: &[T]) -> Result<ExtReal<T>, ToolkitError> {
        self.check(y.len())?;
        Ok(match self {
            ProxFriendly::Zero => {
                if y.iter().all(|v| *v == T::zero()) {
                    ExtReal::zero()
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFriendly::L1 { weight } => {
                if y.iter().all(|v| v.abs() <= *weight) {
                    ExtReal::zero()
                } else {
                    ExtReal::PosInf
                }
            }
            ProxFriendly::IndicatorBox(b) => b.support(y),
            ProxFriendly::L1PlusBox { weight, bounds } => {
                let mut total = T::zero();
                for (m, &v) in y.iter().enumerate() {
                    match l1_box_coordinate_sup(v, *weight, bounds.lower()[m], bounds.upper()[m]) {
                        Some(s) => total = total + s,
                        None => return Ok(ExtReal::PosInf),
                    }
                }
                ExtReal::Finite(total)
            }
            ProxFriendly::Quadratic(q) => match q.conjugate_argmax(&Domain::Whole, y) {
                Ok(x) => {
                    let v = crate::linalg::dot(y, &x) - q.value(&x);
                    ExtReal::Finite(v)
                }
                Err(ToolkitError::Unbounded) => ExtReal::PosInf,
                Err(e) => return Err(e),
            },
        })
    }

    /// An element of `argmax_z (y^T z - g(z))`, the subdifferential of `g^*`
    /// at `y`. When the maximizer is not unique the element closest to
    /// `hint` is returned.
    pub fn conjugate_argmax_nearest(&self, y: &[T], hint: &[T]) -> Result<Vec<T>, ToolkitError> {
        self.check(y.len())?;
        check_dim(y.len(), hint.len())?;
        let inf = T::infinity();
        let per_coord = |f: &dyn Fn(usize) -> Result<(T, T), ToolkitError>| {
            (0..y.len())
                .map(|m| {
                    let (a, b) = f(m)?;
                    let z = hint[m].max(a).min(b);
                    if z.is_finite() {
                        Ok(z)
                    } else {
                        Err(ToolkitError::Unbounded)
                    }
                })
                .collect::<Result<Vec<T>, ToolkitError>>()
        };
        match self {
            ProxFriendly::Zero => per_coord(&|m| {
                if y[m] == T::zero() {
                    Ok((-inf, inf))
                } else {
                    Err(ToolkitError::Unbounded)
                }
            }),
            ProxFriendly::L1 { weight } => {
                let w = *weight;
                per_coord(&|m| l1_box_argmax_interval(y[m], w, -inf, inf))
            }
            ProxFriendly::IndicatorBox(b) => per_coord(&|m| {
                let (l, u) = (b.lower()[m], b.upper()[m]);
                if y[m] > T::zero() {
                    Ok((u, u))
                } else if y[m] < T::zero() {
                    Ok((l, l))
                } else {
                    Ok((l, u))
                }
            }),
            ProxFriendly::L1PlusBox { weight, bounds } => {
                let w = *weight;
                per_coord(&|m| l1_box_argmax_interval(y[m], w, bounds.lower()[m], bounds.upper()[m]))
            }
            ProxFriendly::Quadratic(q) => q.conjugate_argmax(&Domain::Whole, y),
        }
    }

    /// Closed interval containing coordinate `m` of every point of
    /// `dom g^*`, for separable members. `None` when the domain is not a
    /// box (coupled quadratics).
    pub fn conjugate_domain(&self, m: usize) -> Option<(T, T)> {
        let inf = T::infinity();
        let zero = T::zero();
        let l1_box = |w: T, l: T, u: T| {
            (
                if l == -inf { -w } else { -inf },
                if u == inf { w } else { inf },
            )
        };
        match self {
            ProxFriendly::Zero => Some((zero, zero)),
            ProxFriendly::L1 { weight } => Some((-*weight, *weight)),
            ProxFriendly::IndicatorBox(b) => Some(l1_box(zero, b.lower()[m], b.upper()[m])),
            ProxFriendly::L1PlusBox { weight, bounds } => {
                Some(l1_box(*weight, bounds.lower()[m], bounds.upper()[m]))
            }
            ProxFriendly::Quadratic(q) if q.is_separable() => {
                if q.curvature()[(m, m)] > zero {
                    Some((-inf, inf))
                } else {
                    Some((q.linear()[m], q.linear()[m]))
                }
            }
            ProxFriendly::Quadratic(_) => None,
        }
    }

    /// `g + I_omega` as a single catalog member. Quadratics restricted to a
    /// box have no closed-form prox in the catalog and are reported as
    /// `Unsupported`.
    pub fn restrict_to(&self, omega: &Domain<T>) -> Result<ProxFriendly<T>, ToolkitError> {
        let b = match omega {
            Domain::Whole => return Ok(self.clone()),
            Domain::Box(b) => b,
        };
        self.check(b.dim())?;
        let meet = |a: &BoxSet<T>| {
            a.intersect(b).ok_or_else(|| {
                ToolkitError::InvalidParameter("local set does not meet the box of g".into())
            })
        };
        Ok(match self {
            ProxFriendly::Zero => ProxFriendly::IndicatorBox(b.clone()),
            ProxFriendly::L1 { weight } => ProxFriendly::L1PlusBox {
                weight: *weight,
                bounds: b.clone(),
            },
            ProxFriendly::IndicatorBox(a) => ProxFriendly::IndicatorBox(meet(a)?),
            ProxFriendly::L1PlusBox { weight, bounds } => ProxFriendly::L1PlusBox {
                weight: *weight,
                bounds: meet(bounds)?,
            },
            ProxFriendly::Quadratic(_) => {
                return Err(ToolkitError::Unsupported(
                    "quadratic plus box indicator has no closed-form prox".into(),
                ))
            }
        })
    }
}

/// Prox with parameter `c` of the conjugate `g^*`, evaluated through the
/// extended Moreau decomposition as `v - c prox^{1/c}_g[v / c]`. The prox of
/// `g^*` itself is never formed; the result is clipped to the closed domain
/// of `g^*` so that rounding cannot leave it (e.g. `v - c (v / c) != 0`).
pub fn prox_conjugate_via_moreau<T: Scalar>(
    g: &ProxFriendly<T>,
    v: &[T],
    c: T,
) -> Result<Vec<T>, ToolkitError> {
    check_alpha(c)?;
    let inv = T::one() / c;
    let scaled: Vec<T> = v.iter().map(|&x| x * inv).collect();
    let p = g.prox(&scaled, inv)?;
    Ok(v.iter()
        .zip(&p)
        .enumerate()
        .map(|(m, (&x, &pm))| {
            let w = x - c * pm;
            match g.conjugate_domain(m) {
                Some((lo, hi)) => w.max(lo).min(hi),
                None => w,
            }
        })
        .collect())
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<(), ToolkitError> {
    if alpha > T::zero() && alpha.is_finite() {
        Ok(())
    } else {
        Err(ToolkitError::InvalidParameter(format!(
            "prox parameter must be positive, got {alpha}"
        )))
    }
}

/// `sup_{x in [l, u]} (y x - w |x|)`, `None` when unbounded.
fn l1_box_coordinate_sup<T: Scalar>(y: T, w: T, l: T, u: T) -> Option<T> {
    if u == T::infinity() && y - w > T::zero() {
        return None;
    }
    if l == T::neg_infinity() && y + w < T::zero() {
        return None;
    }
    let phi = |x: T| y * x - w * x.abs();
    let mut best = T::neg_infinity();
    for x in [l, u, T::zero().max(l).min(u)] {
        if x.is_finite() {
            best = best.max(phi(x));
        }
    }
    Some(best)
}

/// The interval of maximizers of `y x - w |x|` over `[l, u]`.
fn l1_box_argmax_interval<T: Scalar>(y: T, w: T, l: T, u: T) -> Result<(T, T), ToolkitError> {
    let zero = T::zero();
    let (a, b) = if w == zero && y == zero {
        (l, u)
    } else if y - w > zero {
        (u, u)
    } else if y + w < zero {
        (l, l)
    } else if y == w {
        // flat for x > 0, increasing for x < 0
        if u <= zero {
            (u, u)
        } else {
            (l.max(zero), u)
        }
    } else if y == -w {
        if l >= zero {
            (l, l)
        } else {
            (l, u.min(zero))
        }
    } else {
        let z = zero.max(l).min(u);
        (z, z)
    };
    if !a.is_finite() && a == b {
        return Err(ToolkitError::Unbounded);
    }
    Ok((a, b))
}
