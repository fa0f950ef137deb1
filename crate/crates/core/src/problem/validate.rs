use serde::Serialize;

use crate::scalar::Scalar;

use super::ProblemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotChecked,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }

    /// Failed checks as `name: detail` lines.
    pub fn failures(&self) -> String {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn check(name: &'static str, problems: Vec<String>) -> Check {
    if problems.is_empty() {
        Check {
            name,
            status: CheckStatus::Pass,
            detail: String::new(),
        }
    } else {
        Check {
            name,
            status: CheckStatus::Fail,
            detail: problems.join(", "),
        }
    }
}

/// Structural checks: dimensions, connectivity, block sparsity against the
/// topology and positive strong convexity of every smooth part. Existence
/// of a relative-interior feasible point is not checked.
pub fn validate_instance<T: Scalar>(inst: &ProblemInstance<T>) -> ValidationReport {
    let n = inst.n_agents();
    let (m, b) = (inst.m(), inst.b());
    let topo = inst.topology();

    let mut dims = Vec::new();
    if topo.n_agents() != n {
        dims.push(format!("topology has {} agents, instance has {n}", topo.n_agents()));
    }
    for (i, a) in inst.agents().iter().enumerate() {
        if a.id != i {
            dims.push(format!("agent at position {i} has id {}", a.id));
        }
        if a.constraint.owner != a.id {
            dims.push(format!("agent {i} holds the block of agent {}", a.constraint.owner));
        }
        if a.f.dim() != m {
            dims.push(format!("agent {i}: f has dimension {}", a.f.dim()));
        }
        if let Some(d) = a.g.dim().filter(|&d| d != m) {
            dims.push(format!("agent {i}: g has dimension {d}"));
        }
        if let Some(d) = a.omega.dim().filter(|&d| d != m) {
            dims.push(format!("agent {i}: omega has dimension {d}"));
        }
        if a.constraint.rhs.len() != b {
            dims.push(format!("agent {i}: rhs has {} rows", a.constraint.rhs.len()));
        }
        for (&l, blk) in &a.constraint.blocks {
            if l >= n {
                dims.push(format!("agent {i}: block for unknown agent {l}"));
            }
            if blk.shape() != (b, m) {
                dims.push(format!("agent {i}: block for agent {l} is {:?}", blk.shape()));
            }
        }
    }

    let connectivity = if topo.n_agents() == n && !topo.is_connected() {
        vec!["graph is not connected".to_string()]
    } else {
        Vec::new()
    };

    let mut sparsity = Vec::new();
    for (i, a) in inst.agents().iter().enumerate() {
        for &l in a.constraint.blocks.keys() {
            if l != i && l < topo.n_agents() && i < topo.n_agents() && !topo.are_adjacent(i, l) {
                sparsity.push(format!("agent {i} couples non-neighbor {l}"));
            }
        }
    }

    let mut convexity = Vec::new();
    for (i, a) in inst.agents().iter().enumerate() {
        let s = a.sigma();
        if !(s > T::zero()) {
            convexity.push(format!("agent {i}: sigma = {s}"));
        }
    }

    let mut checks = vec![
        check("dimensions", dims),
        check("connectivity", connectivity),
        check("sparsity", sparsity),
        check("strong_convexity", convexity),
    ];
    checks.push(Check {
        name: "slater",
        status: CheckStatus::NotChecked,
        detail: "feasible relative-interior point is not searched for".into(),
    });
    ValidationReport { checks }
}
