use serde::{Deserialize, Serialize};

use crate::problem::DualLayout;
use crate::scalar::Scalar;

use super::EngineError;

/// The stacked dual vector `lambda = [theta_1..theta_N, mu_1..mu_N]` at
/// iteration `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState<T> {
    layout: DualLayout,
    values: Vec<T>,
    pub k: usize,
}

impl<T: Scalar> DualState<T> {
    pub fn zeros(layout: DualLayout) -> Self {
        DualState {
            layout,
            values: vec![T::zero(); layout.len()],
            k: 0,
        }
    }

    pub fn from_vec(layout: DualLayout, values: Vec<T>, k: usize) -> Result<Self, EngineError> {
        if values.len() != layout.len() {
            return Err(EngineError::InvalidConfig(format!(
                "dual vector has {} entries, layout needs {}",
                values.len(),
                layout.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EngineError::InvalidConfig("dual vector has non-finite entries".into()));
        }
        Ok(DualState { layout, values, k })
    }

    pub fn layout(&self) -> DualLayout {
        self.layout
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<T> {
        self.values
    }

    pub fn theta(&self, i: usize) -> &[T] {
        &self.values[self.layout.theta(i)]
    }

    pub fn mu(&self, i: usize) -> &[T] {
        &self.values[self.layout.mu(i)]
    }

    pub fn theta_mut(&mut self, i: usize) -> &mut [T] {
        let r = self.layout.theta(i);
        &mut self.values[r]
    }

    pub fn mu_mut(&mut self, i: usize) -> &mut [T] {
        let r = self.layout.mu(i);
        &mut self.values[r]
    }

    /// `|lambda_i - other_i|^2` over agent `i`'s theta and mu blocks.
    pub fn agent_dist_sq(&self, other: &[T], i: usize) -> T {
        let th = self.layout.theta(i);
        let mu = self.layout.mu(i);
        crate::linalg::dist_sq(&self.values[th.clone()], &other[th])
            + crate::linalg::dist_sq(&self.values[mu.clone()], &other[mu])
    }
}

/// Step sizes: one `c` for all agents (synchronous) or one `c_i` each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSizes<T> {
    Uniform(T),
    PerAgent(Vec<T>),
}

impl<T: Scalar> StepSizes<T> {
    pub fn c(&self, i: usize) -> T {
        match self {
            StepSizes::Uniform(c) => *c,
            StepSizes::PerAgent(v) => v[i],
        }
    }

    /// `c_i` for every agent.
    pub fn expand(&self, n: usize) -> Vec<T> {
        (0..n).map(|i| self.c(i)).collect()
    }

    pub fn validate(&self, n: usize) -> Result<(), EngineError> {
        if let StepSizes::PerAgent(v) = self {
            if v.len() != n {
                return Err(EngineError::InvalidConfig(format!(
                    "{} step sizes for {n} agents",
                    v.len()
                )));
            }
        }
        for (i, c) in self.expand(n).into_iter().enumerate() {
            if !(c > T::zero() && c.is_finite()) {
                return Err(EngineError::InvalidConfig(format!(
                    "step size of agent {i} must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, s: T) -> Self {
        match self {
            StepSizes::Uniform(c) => StepSizes::Uniform(*c * s),
            StepSizes::PerAgent(v) => StepSizes::PerAgent(v.iter().map(|&c| c * s).collect()),
        }
    }
}

/// `c = 1 / h`.
pub fn step_size_sync<T: Scalar>(h: T) -> Result<StepSizes<T>, EngineError> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(EngineError::InvalidConfig(format!("h must be positive, got {h}")));
    }
    Ok(StepSizes::Uniform(T::one() / h))
}

/// `c_i = margin_i / (h (D + 1)^2)` with margins in `(0, 1]`.
pub fn step_size_async<T: Scalar>(h: T, d: usize, margins: &[T]) -> Result<StepSizes<T>, EngineError> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(EngineError::InvalidConfig(format!("h must be positive, got {h}")));
    }
    let scale = h * T::lit(((d + 1) * (d + 1)) as f64);
    margins
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            if m > T::zero() && m <= T::one() {
                Ok(m / scale)
            } else {
                Err(EngineError::InvalidConfig(format!(
                    "margin of agent {i} must lie in (0, 1], got {m}"
                )))
            }
        })
        .collect::<Result<Vec<T>, _>>()
        .map(StepSizes::PerAgent)
}

/// Relative slack allowed when checking `1/c_i >= h (D+1)^2`, so that
/// step sizes produced by [`step_size_async`] pass despite rounding.
pub const STEP_CONDITION_RTOL: f64 = 1e-12;

/// Checks `1/c_i >= h (D+1)^2` for every agent.
pub fn check_step_condition<T: Scalar>(
    steps: &StepSizes<T>,
    n: usize,
    h: T,
    d: usize,
) -> Result<(), EngineError> {
    let required = h.as_f64() * ((d + 1) * (d + 1)) as f64;
    for i in 0..n {
        let inv = 1.0 / steps.c(i).as_f64();
        if inv < required * (1.0 - STEP_CONDITION_RTOL) {
            return Err(EngineError::StepSizeViolation {
                agent: i,
                inv_c: inv,
                required,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_rules() {
        assert_eq!(step_size_sync(2.0_f64).unwrap(), StepSizes::Uniform(0.5));
        assert_eq!(step_size_sync(1.0_f64).unwrap(), StepSizes::Uniform(1.0));
        assert_eq!(
            step_size_async(1.0_f64, 0, &[1.0]).unwrap(),
            StepSizes::PerAgent(vec![1.0])
        );
        assert_eq!(
            step_size_async(1.0_f64, 3, &[1.0, 0.5]).unwrap(),
            StepSizes::PerAgent(vec![1.0 / 16.0, 0.5 / 16.0])
        );
        assert!(step_size_async(1.0_f64, 3, &[0.0]).is_err());
        assert!(step_size_async(1.0_f64, 3, &[1.5]).is_err());
    }

    #[test]
    fn condition_check() {
        let h = 2260.4502_f64;
        let s = step_size_async(h, 10, &[1.0; 5]).unwrap();
        assert!(check_step_condition(&s, 5, h, 10).is_ok());
        assert!(matches!(
            check_step_condition(&s.scaled(2.0), 5, h, 10),
            Err(EngineError::StepSizeViolation { agent: 0, .. })
        ));
    }
}
