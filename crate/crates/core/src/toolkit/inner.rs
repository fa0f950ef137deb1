use crate::linalg::norm;
use crate::scalar::Scalar;

use super::error::{check_dim, ToolkitError};
use super::SmoothConjugable;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerProxOptions<T> {
    /// Stop once the gradient of the prox objective has norm at most this.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for InnerProxOptions<T> {
    fn default() -> Self {
        InnerProxOptions {
            tol: T::lit(1e-10),
            max_iter: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerProx<T> {
    pub point: Vec<T>,
    pub iterations: usize,
    pub gradient_norm: T,
}

/// Prox with parameter `c` of `q = (g + I_omega)^*` at `v` for a strongly
/// convex `g`, by gradient descent on `q(w) + |w - v|^2 / (2 c)`.
///
/// `g_on_omega` is `g` with `omega` as its effective domain, so that
/// `grad q(w)` is its conjugate argmax. The objective gradient is
/// `(1/sigma + 1/c)`-Lipschitz and the step is the reciprocal of that.
pub fn prox_via_inner_descent<T: Scalar>(
    g_on_omega: &SmoothConjugable<T>,
    v: &[T],
    c: T,
    opts: &InnerProxOptions<T>,
) -> Result<InnerProx<T>, ToolkitError> {
    check_dim(g_on_omega.dim(), v.len())?;
    if !(c > T::zero() && c.is_finite()) {
        return Err(ToolkitError::InvalidParameter(format!(
            "prox parameter must be positive, got {c}"
        )));
    }
    let sigma = g_on_omega.strong_convexity();
    if !(sigma > T::zero()) {
        return Err(ToolkitError::NonStronglyConvex(sigma.as_f64()));
    }
    let inv_c = T::one() / c;
    let step = T::one() / (T::one() / sigma + inv_c);
    let mut w = v.to_vec();
    let mut iterations = 0;
    loop {
        let z = g_on_omega.conjugate_argmax(&w)?;
        let grad: Vec<T> = z
            .iter()
            .zip(w.iter().zip(v))
            .map(|(&zm, (&wm, &vm))| zm + (wm - vm) * inv_c)
            .collect();
        let gn = norm(&grad);
        if gn <= opts.tol {
            return Ok(InnerProx {
                point: w,
                iterations,
                gradient_norm: gn,
            });
        }
        if iterations >= opts.max_iter {
            return Err(ToolkitError::MaxIterExceeded {
                iterations,
                residual: gn.as_f64(),
            });
        }
        for (wm, gm) in w.iter_mut().zip(&grad) {
            *wm = *wm - step * *gm;
        }
        iterations += 1;
    }
}
