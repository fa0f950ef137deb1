use crate::linalg::Mat;
use crate::scalar::Scalar;

use super::validate::{validate_instance, ValidationReport};
use super::{AgentSpec, ProblemError, Topology};

/// Index layout of the stacked dual vector `[theta_1..theta_N, mu_1..mu_N]`
/// with `theta_i` in `R^B` and `mu_i` in `R^M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualLayout {
    pub n: usize,
    pub m: usize,
    pub b: usize,
}

impl DualLayout {
    pub fn len(&self) -> usize {
        self.n * (self.b + self.m)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self, i: usize) -> std::ops::Range<usize> {
        i * self.b..(i + 1) * self.b
    }

    pub fn mu(&self, i: usize) -> std::ops::Range<usize> {
        let off = self.n * self.b + i * self.m;
        off..off + self.m
    }
}

/// Agents, topology and dimensions of a coupled problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance<T> {
    topology: Topology,
    agents: Vec<AgentSpec<T>>,
    m: usize,
    b: usize,
    /// `incoming[i]`: agents `l` whose constraint block has an entry for
    /// `x_i`, ascending.
    incoming: Vec<Vec<usize>>,
}

impl<T: Scalar> ProblemInstance<T> {
    /// Stores the parts without checking them. Use [`Self::new`] unless a
    /// failing [`ValidationReport`] is wanted.
    pub fn assemble(topology: Topology, agents: Vec<AgentSpec<T>>, m: usize, b: usize) -> Self {
        let n = agents.len();
        let mut incoming = vec![Vec::new(); n];
        for (l, a) in agents.iter().enumerate() {
            for &i in a.constraint.blocks.keys() {
                if i < n {
                    incoming[i].push(l);
                }
            }
        }
        ProblemInstance {
            topology,
            agents,
            m,
            b,
            incoming,
        }
    }

    /// Assembles and validates; fails if any structural check fails.
    pub fn new(
        topology: Topology,
        agents: Vec<AgentSpec<T>>,
        m: usize,
        b: usize,
    ) -> Result<Self, ProblemError> {
        let inst = Self::assemble(topology, agents, m, b);
        let report = validate_instance(&inst);
        if report.passed() {
            Ok(inst)
        } else {
            Err(ProblemError::Invalid(report.failures()))
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_instance(self)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn agents(&self) -> &[AgentSpec<T>] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &AgentSpec<T> {
        &self.agents[i]
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn layout(&self) -> DualLayout {
        DualLayout {
            n: self.agents.len(),
            m: self.m,
            b: self.b,
        }
    }

    /// Agents `l` with a block `A_i^(l)` acting on `x_i`, ascending.
    pub fn incoming(&self, i: usize) -> &[usize] {
        &self.incoming[i]
    }

    /// `C_i lambda = -sum_l (A_i^(l))^T theta_l - mu_i`.
    pub fn apply_c(&self, i: usize, lambda: &[T]) -> Vec<T> {
        let lay = self.layout();
        let mut out: Vec<T> = lambda[lay.mu(i)].iter().map(|&v| -v).collect();
        for &l in &self.incoming[i] {
            let a = &self.agents[l].constraint.blocks[&i];
            a.tr_matvec_acc(-T::one(), &lambda[lay.theta(l)], &mut out);
        }
        out
    }

    /// `F_i lambda = mu_i`.
    pub fn apply_f<'a>(&self, i: usize, lambda: &'a [T]) -> &'a [T] {
        &lambda[self.layout().mu(i)]
    }

    /// `E_i lambda = (b^(i))^T theta_i`.
    pub fn apply_e(&self, i: usize, lambda: &[T]) -> T {
        crate::linalg::dot(&self.agents[i].constraint.rhs, &lambda[self.layout().theta(i)])
    }

    /// Accumulates `alpha C_i^T x` into a stacked dual vector.
    pub fn apply_c_adjoint_acc(&self, i: usize, alpha: T, x: &[T], out: &mut [T]) {
        let lay = self.layout();
        for &l in &self.incoming[i] {
            let a = &self.agents[l].constraint.blocks[&i];
            a.matvec_acc(-alpha, x, &mut out[lay.theta(l)]);
        }
        for (o, &v) in out[lay.mu(i)].iter_mut().zip(x) {
            *o = *o - alpha * v;
        }
    }

    /// Dense `M x (NB + NM)` matrix of `C_i`, for diagnostics.
    pub fn dense_c(&self, i: usize) -> Mat<T> {
        let lay = self.layout();
        let mut c = Mat::zeros(self.m, lay.len());
        for &l in &self.incoming[i] {
            let a = &self.agents[l].constraint.blocks[&i];
            let off = lay.theta(l).start;
            for r in 0..self.b {
                for col in 0..self.m {
                    c[(col, off + r)] = -a[(r, col)];
                }
            }
        }
        let off = lay.mu(i).start;
        for col in 0..self.m {
            c[(col, off + col)] = -T::one();
        }
        c
    }

    /// `sum_l (A_i^(l))^T A_i^(l) + I = C_i C_i^T`, an `M x M` Gram matrix.
    pub fn gram_c(&self, i: usize) -> Mat<T> {
        let mut g = Mat::identity(self.m);
        for &l in &self.incoming[i] {
            let a = &self.agents[l].constraint.blocks[&i];
            let ata = a.transpose().matmul(a);
            for r in 0..self.m {
                for c in 0..self.m {
                    g[(r, c)] = g[(r, c)] + ata[(r, c)];
                }
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ConstraintBlock, Topology};
    use crate::toolkit::{Domain, ProxFriendly, QuadraticFunction, SmoothConjugable};
    use std::collections::BTreeMap;

    fn single(a: f64) -> ProblemInstance<f64> {
        let f = SmoothConjugable::quadratic(
            QuadraticFunction::scalar(0.5, 0.0, 0.0).unwrap(),
            Domain::Whole,
        )
        .unwrap();
        let c = ConstraintBlock::new(0, BTreeMap::from([(0, Mat::scalar(a))]), vec![0.0]);
        let agent = AgentSpec::new(0, f, ProxFriendly::Zero, Domain::Whole, c).unwrap();
        ProblemInstance::new(Topology::new(1, &[]).unwrap(), vec![agent], 1, 1).unwrap()
    }

    #[test]
    fn single_agent_operator() {
        let inst = single(2.0);
        assert_eq!(inst.apply_c(0, &[3.0, 4.0]), vec![-10.0]);
        assert_eq!(inst.apply_c(0, &[0.0, 0.0]), vec![0.0]);
        assert_eq!(inst.dense_c(0).as_slice(), &[-2.0, -1.0]);
        let mut out = vec![0.0; 2];
        inst.apply_c_adjoint_acc(0, 1.0, &[1.0], &mut out);
        assert_eq!(out, vec![-2.0, -1.0]);
    }

    #[test]
    fn layout_ranges() {
        let lay = DualLayout { n: 3, m: 2, b: 1 };
        assert_eq!(lay.len(), 9);
        assert_eq!(lay.theta(2), 2..3);
        assert_eq!(lay.mu(0), 3..5);
        assert_eq!(lay.mu(2), 7..9);
    }
}
