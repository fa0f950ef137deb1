//! JSON instance documents. Numbers are stored as `f64`; infinite box
//! bounds are written as `null`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::toolkit::{
    BoxSet, Domain, PiecewiseQuadraticUtility, ProxFriendly, QuadraticFunction, SmoothBase,
    SmoothConjugable,
};

use super::{AgentSpec, ConstraintBlock, ProblemError, ProblemInstance, Topology};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxDoc {
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticDoc {
    pub curvature: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SmoothDoc {
    Quadratic(QuadraticDoc),
    Utility { price: f64, curvature: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FDoc {
    #[serde(flatten)]
    pub base: SmoothDoc,
    #[serde(default)]
    pub domain: Option<BoxDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum GDoc {
    Zero,
    L1Norm { weight: f64 },
    IndicatorBox(BoxDoc),
    L1PlusBox { weight: f64, lower: Vec<Option<f64>>, upper: Vec<Option<f64>> },
    Quadratic(QuadraticDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDoc {
    pub blocks: BTreeMap<usize, Vec<Vec<f64>>>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentDoc {
    pub id: usize,
    pub f: FDoc,
    pub g: GDoc,
    #[serde(default)]
    pub omega: Option<BoxDoc>,
    pub constraint: ConstraintDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub agents: Vec<AgentDoc>,
    pub edges: Vec<[usize; 2]>,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "B")]
    pub b: usize,
}

fn bound_out<T: Scalar>(v: T) -> Option<f64> {
    if v.is_finite() {
        Some(v.as_f64())
    } else {
        None
    }
}

fn box_out<T: Scalar>(b: &BoxSet<T>) -> BoxDoc {
    BoxDoc {
        lower: b.lower().iter().map(|&v| bound_out(v)).collect(),
        upper: b.upper().iter().map(|&v| bound_out(v)).collect(),
    }
}

fn box_in<T: Scalar>(lower: &[Option<f64>], upper: &[Option<f64>]) -> Result<BoxSet<T>, ProblemError> {
    let lo = lower.iter().map(|v| v.map_or(T::neg_infinity(), T::lit)).collect();
    let hi = upper.iter().map(|v| v.map_or(T::infinity(), T::lit)).collect();
    Ok(BoxSet::new(lo, hi)?)
}

fn domain_out<T: Scalar>(d: &Domain<T>) -> Option<BoxDoc> {
    d.as_box().map(box_out)
}

pub(crate) fn domain_in<T: Scalar>(d: &Option<BoxDoc>) -> Result<Domain<T>, ProblemError> {
    Ok(match d {
        None => Domain::Whole,
        Some(b) => Domain::Box(box_in(&b.lower, &b.upper)?),
    })
}

fn mat_out<T: Scalar>(m: &Mat<T>) -> Vec<Vec<f64>> {
    m.to_rows()
        .into_iter()
        .map(|r| r.into_iter().map(Scalar::as_f64).collect())
        .collect()
}

fn mat_in<T: Scalar>(rows: &[Vec<f64>], what: &str) -> Result<Mat<T>, ProblemError> {
    let conv: Vec<Vec<T>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| T::lit(v)).collect())
        .collect();
    Mat::from_rows(&conv).ok_or_else(|| ProblemError::Format(format!("ragged matrix in {what}")))
}

fn quad_out<T: Scalar>(q: &QuadraticFunction<T>) -> QuadraticDoc {
    QuadraticDoc {
        curvature: mat_out(q.curvature()),
        linear: q.linear().iter().map(|v| v.as_f64()).collect(),
        offset: q.offset().as_f64(),
    }
}

fn quad_in<T: Scalar>(q: &QuadraticDoc) -> Result<QuadraticFunction<T>, ProblemError> {
    Ok(QuadraticFunction::new(
        mat_in(&q.curvature, "curvature")?,
        q.linear.iter().map(|&v| T::lit(v)).collect(),
        T::lit(q.offset),
    )?)
}

pub(crate) fn f_in<T: Scalar>(f: &FDoc) -> Result<SmoothConjugable<T>, ProblemError> {
    let dom = domain_in(&f.domain)?;
    Ok(match &f.base {
        SmoothDoc::Quadratic(q) => SmoothConjugable::quadratic(quad_in(q)?, dom)?,
        SmoothDoc::Utility { price, curvature } => SmoothConjugable::utility(
            PiecewiseQuadraticUtility::new(T::lit(*price), T::lit(*curvature))?,
            dom,
        )?,
    })
}

pub(crate) fn g_in<T: Scalar>(g: &GDoc) -> Result<ProxFriendly<T>, ProblemError> {
    Ok(match g {
        GDoc::Zero => ProxFriendly::Zero,
        GDoc::L1Norm { weight } => ProxFriendly::l1(T::lit(*weight))?,
        GDoc::IndicatorBox(b) => ProxFriendly::IndicatorBox(box_in(&b.lower, &b.upper)?),
        GDoc::L1PlusBox {
            weight,
            lower,
            upper,
        } => {
            if !(*weight >= 0.0) {
                return Err(ProblemError::Format(format!("negative l1 weight {weight}")));
            }
            ProxFriendly::L1PlusBox {
                weight: T::lit(*weight),
                bounds: box_in(lower, upper)?,
            }
        }
        GDoc::Quadratic(q) => ProxFriendly::Quadratic(quad_in(q)?),
    })
}

impl InstanceDoc {
    pub fn from_instance<T: Scalar>(inst: &ProblemInstance<T>) -> Self {
        let agents = inst
            .agents()
            .iter()
            .map(|a| AgentDoc {
                id: a.id,
                f: FDoc {
                    base: match a.f.base() {
                        SmoothBase::Quadratic(q) => SmoothDoc::Quadratic(quad_out(q)),
                        SmoothBase::Utility(u) => SmoothDoc::Utility {
                            price: u.price().as_f64(),
                            curvature: u.curvature().as_f64(),
                        },
                    },
                    domain: domain_out(a.f.domain()),
                },
                g: match &a.g {
                    ProxFriendly::Zero => GDoc::Zero,
                    ProxFriendly::L1 { weight } => GDoc::L1Norm {
                        weight: weight.as_f64(),
                    },
                    ProxFriendly::IndicatorBox(b) => GDoc::IndicatorBox(box_out(b)),
                    ProxFriendly::L1PlusBox { weight, bounds } => {
                        let b = box_out(bounds);
                        GDoc::L1PlusBox {
                            weight: weight.as_f64(),
                            lower: b.lower,
                            upper: b.upper,
                        }
                    }
                    ProxFriendly::Quadratic(q) => GDoc::Quadratic(quad_out(q)),
                },
                omega: domain_out(&a.omega),
                constraint: ConstraintDoc {
                    blocks: a
                        .constraint
                        .blocks
                        .iter()
                        .map(|(&l, m)| (l, mat_out(m)))
                        .collect(),
                    rhs: a.constraint.rhs.iter().map(|v| v.as_f64()).collect(),
                },
            })
            .collect();
        InstanceDoc {
            agents,
            edges: inst.topology().edges().iter().map(|&(a, b)| [a, b]).collect(),
            m: inst.m(),
            b: inst.b(),
        }
    }

    /// Builds the instance; agents are ordered by id and the result must
    /// pass validation.
    pub fn to_instance<T: Scalar>(&self) -> Result<ProblemInstance<T>, ProblemError> {
        let mut docs: Vec<&AgentDoc> = self.agents.iter().collect();
        docs.sort_by_key(|a| a.id);
        let mut agents = Vec::with_capacity(docs.len());
        for a in docs {
            let f = f_in(&a.f)?;
            let g = g_in(&a.g)?;
            let mut blocks = BTreeMap::new();
            for (&l, rows) in &a.constraint.blocks {
                blocks.insert(l, mat_in(rows, "constraint block")?);
            }
            let constraint = ConstraintBlock::new(
                a.id,
                blocks,
                a.constraint.rhs.iter().map(|&v| T::lit(v)).collect(),
            );
            agents.push(AgentSpec::new(a.id, f, g, domain_in(&a.omega)?, constraint)?);
        }
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let topology = Topology::new(agents.len(), &edges)?;
        ProblemInstance::new(topology, agents, self.m, self.b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance documents serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, ProblemError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("instance documents serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

pub fn save_instance<T: Scalar>(inst: &ProblemInstance<T>, path: &Path) -> Result<(), ProblemError> {
    std::fs::write(path, InstanceDoc::from_instance(inst).to_json())
        .map_err(|e| ProblemError::Io(format!("{}: {e}", path.display())))
}

pub fn load_instance<T: Scalar>(path: &Path) -> Result<ProblemInstance<T>, ProblemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ProblemError::Io(format!("{}: {e}", path.display())))?;
    InstanceDoc::from_json(&text)?.to_instance()
}

pub fn instance_hash<T: Scalar>(inst: &ProblemInstance<T>) -> String {
    InstanceDoc::from_instance(inst).hash()
}
