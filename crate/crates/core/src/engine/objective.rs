use crate::linalg::dist_sq;
use crate::problem::ProblemInstance;
use crate::scalar::{ExtReal, Scalar};

use super::step::local_maximizer;
use super::EngineError;

/// `Psi = P + Q` at a dual point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualValue<T> {
    pub psi: ExtReal<T>,
    /// `sum_i f_i^*(C_i lambda) + (b^(i))^T theta_i`.
    pub p: ExtReal<T>,
    /// `sum_i (g_i + I_{Omega_i})^*(mu_i)`.
    pub q: ExtReal<T>,
}

pub fn dual_objective<T: Scalar>(
    inst: &ProblemInstance<T>,
    lambda: &[T],
) -> Result<DualValue<T>, EngineError> {
    let lay = inst.layout();
    let mut p = ExtReal::zero();
    let mut q = ExtReal::zero();
    for (i, a) in inst.agents().iter().enumerate() {
        let fc = a.f.conjugate_value(&inst.apply_c(i, lambda))?;
        p = p + fc + inst.apply_e(i, lambda);
        q = q + a.local_conjugate().value(&lambda[lay.mu(i)])?;
    }
    Ok(DualValue { psi: p + q, p, q })
}

/// Primal quantities read off a dual point.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimalRecovery<T> {
    /// `x_hat_i = grad f_i^*(C_i lambda)`.
    pub x_hat: Vec<Vec<T>>,
    /// Maximizer of `mu_i^T z - (g_i + I_{Omega_i})(z)` nearest to `x_hat_i`.
    pub z_hat: Vec<Vec<T>>,
    /// `|x_hat - z_hat|` over all agents.
    pub mismatch: T,
    /// `b^(i) - sum_l A_l^(i) x_hat_l` per agent.
    pub residuals: Vec<Vec<T>>,
}

impl<T: Scalar> PrimalRecovery<T> {
    /// Largest constraint residual entry in absolute value.
    pub fn max_residual(&self) -> T {
        self.residuals
            .iter()
            .flatten()
            .fold(T::zero(), |a, &r| a.max(r.abs()))
    }

    /// `x_hat` of scalar agents as a flat vector.
    pub fn flat_x(&self) -> Vec<T> {
        self.x_hat.iter().flatten().copied().collect()
    }
}

pub fn recover_primal<T: Scalar>(
    inst: &ProblemInstance<T>,
    lambda: &[T],
) -> Result<PrimalRecovery<T>, EngineError> {
    let lay = inst.layout();
    let x_hat = (0..inst.n_agents())
        .map(|i| local_maximizer(inst, i, lambda))
        .collect::<Result<Vec<_>, _>>()?;
    let z_hat = (0..inst.n_agents())
        .map(|i| {
            inst.agent(i)
                .local_conjugate()
                .argmax(&lambda[lay.mu(i)], &x_hat[i])
                .map_err(EngineError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mismatch = x_hat
        .iter()
        .zip(&z_hat)
        .map(|(x, z)| dist_sq(x, z))
        .fold(T::zero(), |a, b| a + b)
        .sqrt();
    let residuals = inst
        .agents()
        .iter()
        .map(|a| {
            let mut r = a.constraint.rhs.clone();
            for (&l, blk) in &a.constraint.blocks {
                blk.matvec_acc(-T::one(), &x_hat[l], &mut r);
            }
            r
        })
        .collect();
    Ok(PrimalRecovery {
        x_hat,
        z_hat,
        mismatch,
        residuals,
    })
}

/// Primal objective `sum_i f_i(x_i) + g_i(x_i)` with `+inf` off `Omega_i`.
pub fn primal_objective<T: Scalar>(inst: &ProblemInstance<T>, x: &[Vec<T>]) -> ExtReal<T> {
    inst.agents()
        .iter()
        .zip(x)
        .map(|(a, xi)| {
            if !a.omega.contains(xi) {
                return ExtReal::PosInf;
            }
            a.f.value(xi) + a.g.value(xi)
        })
        .sum()
}

