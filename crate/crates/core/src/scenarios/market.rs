use serde::{Deserialize, Serialize};

use crate::linalg::Mat;
use crate::problem::{AgentSpec, ConstraintBlock, ProblemInstance, Topology};
use crate::scalar::Scalar;
use crate::toolkit::{
    BoxSet, Domain, PiecewiseQuadraticUtility, ProxFriendly, QuadraticFunction, SmoothConjugable,
};

use super::transform::{apply_transform, TransformSpec};
use super::ScenarioError;

/// Generation costs `kappa x^2 + theta x + beta` of the utility companies
/// and saturating utilities `pi x - s x^2` of the users. Missing fields in
/// a JSON override take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketParams {
    pub uc_kappa: Vec<f64>,
    pub uc_theta: Vec<f64>,
    pub uc_beta: Vec<f64>,
    pub uc_xmax: Vec<f64>,
    pub user_pi: Vec<f64>,
    pub user_varsigma: Vec<f64>,
    pub user_xmax: Vec<f64>,
    /// One scalar interpretation per agent, companies first.
    pub transforms: Vec<f64>,
    /// Restrict the company costs to their capacity box instead of leaving
    /// them on the whole line (the box is then carried by `f` and `g`).
    pub fold_uc_box: bool,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams {
            uc_kappa: vec![0.0031, 0.0074],
            uc_theta: vec![8.71, 3.53],
            uc_beta: vec![0.0, 0.0],
            uc_xmax: vec![150.0, 150.0],
            user_pi: vec![17.17, 12.28, 18.42],
            user_varsigma: vec![0.0935, 0.0417, 0.1007],
            user_xmax: vec![91.79, 147.29, 91.41],
            transforms: vec![1.0, 2.0, -1.0, 1.0, -1.0],
            fold_uc_box: false,
        }
    }
}

impl MarketParams {
    pub fn n_uc(&self) -> usize {
        self.uc_kappa.len()
    }

    pub fn n_users(&self) -> usize {
        self.user_pi.len()
    }

    pub fn n_agents(&self) -> usize {
        self.n_uc() + self.n_users()
    }

    /// Global supply-demand row `[1, .., 1, -1, .., -1]`.
    pub fn balance_row(&self) -> Vec<f64> {
        let mut row = vec![1.0; self.n_uc()];
        row.extend(std::iter::repeat_n(-1.0, self.n_users()));
        row
    }

    fn check(&self) -> Result<(), ScenarioError> {
        let nu = self.n_uc();
        let ne = self.n_users();
        let lens = [
            ("uc_theta", self.uc_theta.len(), nu),
            ("uc_beta", self.uc_beta.len(), nu),
            ("uc_xmax", self.uc_xmax.len(), nu),
            ("user_varsigma", self.user_varsigma.len(), ne),
            ("user_xmax", self.user_xmax.len(), ne),
            ("transforms", self.transforms.len(), nu + ne),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(ScenarioError::Dimension(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        if self.uc_kappa.iter().chain(&self.user_varsigma).any(|&v| !(v > 0.0)) {
            return Err(ScenarioError::Dimension(
                "curvatures kappa and varsigma must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The electricity market: companies `0..n_uc`, users after them, on a
/// complete graph with the single balance row interpreted per agent.
pub fn build_market<T: Scalar>(params: &MarketParams) -> Result<ProblemInstance<T>, ScenarioError> {
    params.check()?;
    let n = params.n_agents();
    let row: Vec<T> = params.balance_row().into_iter().map(T::lit).collect();
    let a = Mat::from_row_major(1, n, row);
    let spec = TransformSpec::scalars(&params.transforms.iter().map(|&t| T::lit(t)).collect::<Vec<_>>());
    let blocks = apply_transform(&spec, &a, &[T::zero()], 1)?;

    let mut agents = Vec::with_capacity(n);
    for (i, blk) in blocks.into_iter().enumerate() {
        let constraint = ConstraintBlock::new(i, blk.blocks, blk.rhs);
        let (f, xmax) = if i < params.n_uc() {
            let xmax = T::lit(params.uc_xmax[i]);
            let cost = QuadraticFunction::scalar(
                T::lit(params.uc_kappa[i]),
                T::lit(params.uc_theta[i]),
                T::lit(params.uc_beta[i]),
            )?;
            let dom = if params.fold_uc_box {
                Domain::Box(BoxSet::interval(T::zero(), xmax)?)
            } else {
                Domain::Whole
            };
            (SmoothConjugable::quadratic(cost, dom)?, xmax)
        } else {
            let j = i - params.n_uc();
            let xmax = T::lit(params.user_xmax[j]);
            let u = PiecewiseQuadraticUtility::new(
                T::lit(params.user_pi[j]),
                T::lit(params.user_varsigma[j]),
            )?;
            let dom = Domain::Box(BoxSet::interval(T::zero(), xmax)?);
            (SmoothConjugable::utility(u, dom)?, xmax)
        };
        let bx = BoxSet::interval(T::zero(), xmax)?;
        agents.push(AgentSpec::new(
            i,
            f,
            ProxFriendly::IndicatorBox(bx.clone()),
            Domain::Box(bx),
            constraint,
        )?);
    }
    Ok(ProblemInstance::new(Topology::complete(n), agents, 1, 1)?)
}
