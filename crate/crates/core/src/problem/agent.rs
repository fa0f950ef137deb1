use std::collections::BTreeMap;

use crate::linalg::Mat;
use crate::scalar::{ExtReal, Scalar};
use crate::toolkit::{
    prox_conjugate_via_moreau, prox_via_inner_descent, Domain, InnerProxOptions, ProxFriendly,
    SmoothConjugable, ToolkitError,
};

use super::ProblemError;

/// Agent `owner`'s view `A^(i) x = b^(i)` of the coupling constraint.
/// `blocks[l]` is the `B x M` matrix multiplying `x_l`; missing entries
/// are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintBlock<T> {
    pub owner: usize,
    pub blocks: BTreeMap<usize, Mat<T>>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> ConstraintBlock<T> {
    pub fn new(owner: usize, blocks: BTreeMap<usize, Mat<T>>, rhs: Vec<T>) -> Self {
        ConstraintBlock { owner, blocks, rhs }
    }

    pub fn n_rows(&self) -> usize {
        self.rhs.len()
    }

    /// `A_l^(i)`, if stored.
    pub fn block(&self, l: usize) -> Option<&Mat<T>> {
        self.blocks.get(&l)
    }
}

/// How the conjugate of `g_i + I_{Omega_i}` is handled in the mu update.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalConjugate<T> {
    /// `g + I_Omega` is itself in the closed-form catalog; its conjugate's
    /// prox goes through the Moreau decomposition.
    Moreau(ProxFriendly<T>),
    /// Strongly convex quadratic `g` restricted to a box; the conjugate's
    /// gradient is an argmax and its prox is found by inner gradient
    /// descent.
    InnerDescent(SmoothConjugable<T>),
}

impl<T: Scalar> LocalConjugate<T> {
    fn build(g: &ProxFriendly<T>, omega: &Domain<T>) -> Result<Self, ProblemError> {
        match g.restrict_to(omega) {
            Ok(p) => Ok(LocalConjugate::Moreau(p)),
            Err(ToolkitError::Unsupported(_)) => match g {
                ProxFriendly::Quadratic(q) => {
                    let s = SmoothConjugable::quadratic(q.clone(), omega.clone())?;
                    if s.strong_convexity() > T::zero() {
                        Ok(LocalConjugate::InnerDescent(s))
                    } else {
                        Err(ToolkitError::NonStronglyConvex(s.strong_convexity().as_f64()).into())
                    }
                }
                _ => unreachable!("only quadratics lack a closed-form restriction"),
            },
            Err(e) => Err(e.into()),
        }
    }

    /// `(g + I_Omega)^*(mu)`.
    pub fn value(&self, mu: &[T]) -> Result<ExtReal<T>, ToolkitError> {
        match self {
            LocalConjugate::Moreau(p) => p.conjugate_value(mu),
            LocalConjugate::InnerDescent(s) => s.conjugate_value(mu),
        }
    }

    /// `prox^c` of `(g + I_Omega)^*` at `v`.
    pub fn prox(&self, v: &[T], c: T, inner: &InnerProxOptions<T>) -> Result<Vec<T>, ToolkitError> {
        match self {
            LocalConjugate::Moreau(p) => prox_conjugate_via_moreau(p, v, c),
            LocalConjugate::InnerDescent(s) => Ok(prox_via_inner_descent(s, v, c, inner)?.point),
        }
    }

    /// A maximizer of `mu^T z - (g + I_Omega)(z)`, nearest to `hint` when
    /// not unique.
    pub fn argmax(&self, mu: &[T], hint: &[T]) -> Result<Vec<T>, ToolkitError> {
        match self {
            LocalConjugate::Moreau(p) => p.conjugate_argmax_nearest(mu, hint),
            LocalConjugate::InnerDescent(s) => s.conjugate_argmax(mu),
        }
    }
}

/// One agent: `H_i = f_i + g_i` on `Omega_i` with its constraint block.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentSpec<T> {
    pub id: usize,
    pub f: SmoothConjugable<T>,
    pub g: ProxFriendly<T>,
    pub omega: Domain<T>,
    pub constraint: ConstraintBlock<T>,
    local: LocalConjugate<T>,
}

impl<T: Scalar> AgentSpec<T> {
    pub fn new(
        id: usize,
        f: SmoothConjugable<T>,
        g: ProxFriendly<T>,
        omega: Domain<T>,
        constraint: ConstraintBlock<T>,
    ) -> Result<Self, ProblemError> {
        let local = LocalConjugate::build(&g, &omega)?;
        Ok(AgentSpec {
            id,
            f,
            g,
            omega,
            constraint,
            local,
        })
    }

    pub fn local_conjugate(&self) -> &LocalConjugate<T> {
        &self.local
    }

    pub fn sigma(&self) -> T {
        self.f.strong_convexity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::{BoxSet, QuadraticFunction};

    fn f() -> SmoothConjugable<f64> {
        SmoothConjugable::quadratic(QuadraticFunction::scalar(1.0, 0.0, 0.0).unwrap(), Domain::Whole)
            .unwrap()
    }

    fn block() -> ConstraintBlock<f64> {
        ConstraintBlock::new(0, BTreeMap::from([(0, Mat::scalar(1.0))]), vec![0.0])
    }

    #[test]
    fn route_selection() {
        let bx = Domain::Box(BoxSet::interval(-1.0, 1.0).unwrap());
        let a = AgentSpec::new(0, f(), ProxFriendly::Zero, bx.clone(), block()).unwrap();
        assert!(matches!(a.local_conjugate(), LocalConjugate::Moreau(ProxFriendly::IndicatorBox(_))));
        let q = ProxFriendly::Quadratic(QuadraticFunction::scalar(1.0, 0.0, 0.0).unwrap());
        let b = AgentSpec::new(0, f(), q.clone(), bx.clone(), block()).unwrap();
        assert!(matches!(b.local_conjugate(), LocalConjugate::InnerDescent(_)));
        let c = AgentSpec::new(0, f(), q, Domain::Whole, block()).unwrap();
        assert!(matches!(c.local_conjugate(), LocalConjugate::Moreau(ProxFriendly::Quadratic(_))));
        let flat = ProxFriendly::Quadratic(QuadraticFunction::scalar(0.0, 1.0, 0.0).unwrap());
        assert!(AgentSpec::new(0, f(), flat, bx, block()).is_err());
    }

    #[test]
    fn both_routes_agree_on_a_boxed_quadratic() {
        // Moreau on the quadratic alone vs inner descent with a huge box
        let q = QuadraticFunction::scalar(1.5, -0.5, 0.0).unwrap();
        let moreau = LocalConjugate::Moreau(ProxFriendly::Quadratic(q.clone()));
        let inner = LocalConjugate::InnerDescent(
            SmoothConjugable::quadratic(q, Domain::Box(BoxSet::interval(-1e6, 1e6).unwrap()))
                .unwrap(),
        );
        let opts = InnerProxOptions::default();
        for v in [-3.0, 0.2, 4.0] {
            let a: f64 = moreau.prox(&[v], 0.3, &opts).unwrap()[0];
            let b = inner.prox(&[v], 0.3, &opts).unwrap()[0];
            assert!((a - b).abs() < 1e-9, "{v}: {a} vs {b}");
        }
    }
}
