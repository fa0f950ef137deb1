use crate::linalg::{self, dot, norm};
use crate::scalar::Scalar;

use super::{ProblemError, ProblemInstance};

/// Dense singular values are used while `C_i` has at most this many
/// columns; larger instances fall back to power iteration.
pub const DENSE_SVD_MAX_COLS: usize = 2048;
pub const POWER_ITERATION_TOL: f64 = 1e-10;
const POWER_ITERATION_MAX: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzConstant<T> {
    /// `h = sum_i h_i`.
    pub h: T,
    /// `h_i = |C_i|^2 / sigma_i`.
    pub per_agent: Vec<T>,
}

/// Lipschitz constant of `grad P`.
pub fn lipschitz_constant<T: Scalar>(
    inst: &ProblemInstance<T>,
) -> Result<LipschitzConstant<T>, ProblemError> {
    let dense = inst.layout().len() <= DENSE_SVD_MAX_COLS;
    let mut per_agent = Vec::with_capacity(inst.n_agents());
    for (i, a) in inst.agents().iter().enumerate() {
        let sigma = a.sigma();
        if !(sigma > T::zero()) {
            return Err(ProblemError::SingularScale {
                agent: i,
                sigma: sigma.as_f64(),
            });
        }
        let norm_sq = if dense {
            let s = linalg::spectral_norm(&inst.dense_c(i));
            s * s
        } else {
            power_norm_sq(inst, i)
        };
        per_agent.push(norm_sq / sigma);
    }
    let h = per_agent.iter().copied().sum();
    Ok(LipschitzConstant { h, per_agent })
}

/// `|C_i|^2` as the top eigenvalue of `C_i C_i^T` by power iteration.
fn power_norm_sq<T: Scalar>(inst: &ProblemInstance<T>, i: usize) -> T {
    let m = inst.m();
    let len = inst.layout().len();
    let mut x: Vec<T> = (0..m).map(|k| T::one() + T::lit(k as f64) * T::lit(1e-3)).collect();
    let nx = norm(&x);
    x.iter_mut().for_each(|v| *v = *v / nx);
    let mut est = T::zero();
    for _ in 0..POWER_ITERATION_MAX {
        let mut lam = vec![T::zero(); len];
        inst.apply_c_adjoint_acc(i, T::one(), &x, &mut lam);
        let y = inst.apply_c(i, &lam);
        let next = dot(&x, &y);
        let ny = norm(&y);
        if ny == T::zero() {
            return T::zero();
        }
        x = y.into_iter().map(|v| v / ny).collect();
        if (next - est).abs() <= T::lit(POWER_ITERATION_TOL) * next.abs().max(T::one()) {
            return next;
        }
        est = next;
    }
    log::warn!("power iteration for agent {i} did not reach tolerance");
    est
}
