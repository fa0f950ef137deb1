use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::linalg::Mat;
use crate::problem::io::{self, BoxDoc, FDoc, GDoc, QuadraticDoc, SmoothDoc};
use crate::problem::{AgentSpec, ConstraintBlock, ProblemError, ProblemInstance, Topology};
use crate::scalar::Scalar;
use crate::toolkit::{Domain, ProxFriendly, QuadraticFunction, SmoothConjugable};

use super::ScenarioError;

/// Local data of one consensus agent.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusLocal<T> {
    pub f: SmoothConjugable<T>,
    pub g: ProxFriendly<T>,
    pub omega: Domain<T>,
}

impl<T: Scalar> ConsensusLocal<T> {
    /// `w/2 (x - a)^2` with no nonsmooth part.
    pub fn quadratic(a: T, w: T) -> Self {
        let q = QuadraticFunction::scalar(w / T::lit(2.0), -w * a, w * a * a / T::lit(2.0))
            .expect("scalar quadratic is well formed");
        ConsensusLocal {
            f: SmoothConjugable::quadratic(q, Domain::Whole).expect("whole-space domain"),
            g: ProxFriendly::Zero,
            omega: Domain::Whole,
        }
    }
}

/// Agent `i` requires `|V_i| x_i - sum_{l in V_i} x_l = 0`, so the stacked
/// constraints are `(L kron I_M) x = 0` for the graph Laplacian `L`.
pub fn build_consensus<T: Scalar>(
    topology: Topology,
    locals: Vec<ConsensusLocal<T>>,
    m: usize,
) -> Result<ProblemInstance<T>, ScenarioError> {
    if locals.len() != topology.n_agents() {
        return Err(ScenarioError::Dimension(format!(
            "{} locals for {} agents",
            locals.len(),
            topology.n_agents()
        )));
    }
    let mut agents = Vec::with_capacity(locals.len());
    for (i, loc) in locals.into_iter().enumerate() {
        let mut blocks = BTreeMap::new();
        let deg = T::lit(topology.degree(i) as f64);
        blocks.insert(i, Mat::scaled_identity(m, deg));
        for &l in topology.neighbors(i) {
            blocks.insert(l, Mat::scaled_identity(m, -T::one()));
        }
        let c = ConstraintBlock::new(i, blocks, vec![T::zero(); m]);
        agents.push(AgentSpec::new(i, loc.f, loc.g, loc.omega, c)?);
    }
    Ok(ProblemInstance::new(topology, agents, m, m)?)
}

/// JSON description of a consensus problem: the graph plus local
/// functions in the instance-document format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsensusDoc {
    #[serde(rename = "M", default = "one")]
    pub m: usize,
    pub edges: Vec<[usize; 2]>,
    pub locals: Vec<LocalDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalDoc {
    pub f: FDoc,
    #[serde(default = "zero_g")]
    pub g: GDoc,
    #[serde(default)]
    pub omega: Option<BoxDoc>,
}

fn one() -> usize {
    1
}

fn zero_g() -> GDoc {
    GDoc::Zero
}

impl Default for ConsensusDoc {
    /// Three agents on a path with `1/2 (x - a_i)^2`, `a = (0, 3, 6)`.
    fn default() -> Self {
        let locals = [0.0, 3.0, 6.0]
            .iter()
            .map(|&a| LocalDoc {
                f: FDoc {
                    base: SmoothDoc::Quadratic(QuadraticDoc {
                        curvature: vec![vec![1.0]],
                        linear: vec![-a],
                        offset: a * a / 2.0,
                    }),
                    domain: None,
                },
                g: GDoc::Zero,
                omega: None,
            })
            .collect();
        ConsensusDoc {
            m: 1,
            edges: vec![[0, 1], [1, 2]],
            locals,
        }
    }
}

impl ConsensusDoc {
    pub fn build<T: Scalar>(&self) -> Result<ProblemInstance<T>, ScenarioError> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let topology = Topology::new(self.locals.len(), &edges)?;
        let locals = self
            .locals
            .iter()
            .map(|l| {
                Ok(ConsensusLocal {
                    f: io::f_in(&l.f)?,
                    g: io::g_in(&l.g)?,
                    omega: io::domain_in(&l.omega)?,
                })
            })
            .collect::<Result<Vec<_>, ProblemError>>()?;
        build_consensus(topology, locals, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_blocks() {
        let locals = (0..3).map(|a| ConsensusLocal::quadratic(a as f64, 1.0)).collect();
        let inst = build_consensus(Topology::path(3), locals, 1).unwrap();
        let b1 = &inst.agent(1).constraint.blocks;
        assert_eq!(b1[&1], Mat::scalar(2.0));
        assert_eq!(b1[&0], Mat::scalar(-1.0));
        assert_eq!(b1[&2], Mat::scalar(-1.0));
        assert!(!inst.agent(0).constraint.blocks.contains_key(&2));
    }

    #[test]
    fn default_document_builds() {
        let inst: ProblemInstance<f64> = ConsensusDoc::default().build().unwrap();
        assert_eq!(inst.n_agents(), 3);
        let json = serde_json::to_string(&ConsensusDoc::default()).unwrap();
        let back: ConsensusDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ConsensusDoc::default());
    }
}
