use std::collections::BTreeMap;

use crate::linalg::{self, Mat};
use crate::scalar::Scalar;

use super::ScenarioError;

/// Per-agent interpretations `T_i` of a global constraint `A x = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformSpec<T> {
    pub transforms: Vec<Mat<T>>,
}

/// One agent's transformed constraint, split by the agent whose variable
/// each column block multiplies. All-zero blocks are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedBlock<T> {
    pub blocks: BTreeMap<usize, Mat<T>>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> TransformSpec<T> {
    /// Scalar transforms, one per agent, for a single-row constraint.
    pub fn scalars(t: &[T]) -> Self {
        TransformSpec {
            transforms: t.iter().map(|&v| Mat::scalar(v)).collect(),
        }
    }

    pub fn identity(n_agents: usize, rows: usize) -> Self {
        TransformSpec {
            transforms: vec![Mat::identity(rows); n_agents],
        }
    }
}

/// `A^(i) = T_i A`, `b^(i) = T_i b`, with `A` laid out as `N` column blocks
/// of width `m`.
pub fn apply_transform<T: Scalar>(
    spec: &TransformSpec<T>,
    a: &Mat<T>,
    b: &[T],
    m: usize,
) -> Result<Vec<TransformedBlock<T>>, ScenarioError> {
    if a.rows() != b.len() {
        return Err(ScenarioError::Dimension(format!(
            "A has {} rows but b has {} entries",
            a.rows(),
            b.len()
        )));
    }
    if m == 0 || a.cols() != spec.transforms.len() * m {
        return Err(ScenarioError::Dimension(format!(
            "A has {} columns, expected {} agents of width {m}",
            a.cols(),
            spec.transforms.len()
        )));
    }
    let b_col = Mat::from_row_major(b.len(), 1, b.to_vec());
    spec.transforms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            if t.cols() != a.rows() {
                return Err(ScenarioError::Dimension(format!(
                    "T_{i} has {} columns, A has {} rows",
                    t.cols(),
                    a.rows()
                )));
            }
            if linalg::rank(t, 1e-12) < t.rows() {
                return Err(ScenarioError::RankDeficient { agent: i });
            }
            let ta = t.matmul(a);
            let blocks = (0..spec.transforms.len())
                .map(|l| (l, ta.column_block(l * m, m)))
                .filter(|(_, blk)| !blk.is_zero())
                .collect();
            Ok(TransformedBlock {
                blocks,
                rhs: t.matmul(&b_col).as_slice().to_vec(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(r: &[&[f64]]) -> Mat<f64> {
        Mat::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn three_agent_interpretation() {
        let a = rows(&[&[1.0, 1.0, 0.0], &[2.0, 0.0, 1.0]]);
        let b = [1.0, 2.0];
        let spec = TransformSpec {
            transforms: vec![
                rows(&[&[-1.0, 0.0], &[0.0, 0.5]]),
                rows(&[&[2.0, 0.0]]),
                rows(&[&[0.0, -1.0]]),
            ],
        };
        let out = apply_transform(&spec, &a, &b, 1).unwrap();
        let dense = |t: &TransformedBlock<f64>, r: usize| -> Vec<f64> {
            (0..3)
                .map(|l| t.blocks.get(&l).map_or(0.0, |m| m[(r, 0)]))
                .collect()
        };
        assert_eq!(dense(&out[0], 0), vec![-1.0, -1.0, 0.0]);
        assert_eq!(dense(&out[0], 1), vec![1.0, 0.0, 0.5]);
        assert_eq!(out[0].rhs, vec![-1.0, 1.0]);
        assert_eq!(dense(&out[1], 0), vec![2.0, 2.0, 0.0]);
        assert_eq!(out[1].rhs, vec![2.0]);
        assert!(!out[1].blocks.contains_key(&2));
        assert_eq!(dense(&out[2], 0), vec![-2.0, 0.0, -1.0]);
        assert_eq!(out[2].rhs, vec![-2.0]);

        // the stacked interpretations pin down the same solution set as A x = b
        let mut stacked = Vec::new();
        for t in &out {
            for r in 0..t.rhs.len() {
                stacked.push(dense(t, r));
            }
        }
        let s = Mat::from_rows(&stacked).unwrap();
        assert_eq!(linalg::rank(&s, 1e-12), linalg::rank(&a, 1e-12));
        let x = [0.5, 0.5, 1.0];
        for t in &out {
            for r in 0..t.rhs.len() {
                let lhs: f64 = dense(t, r).iter().zip(&x).map(|(p, q)| p * q).sum();
                assert!((lhs - t.rhs[r]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_transform_keeps_constraint() {
        let a = rows(&[&[1.0, -2.0]]);
        let out = apply_transform(&TransformSpec::identity(2, 1), &a, &[3.0], 1).unwrap();
        for t in &out {
            assert_eq!(t.blocks[&0], Mat::scalar(1.0));
            assert_eq!(t.blocks[&1], Mat::scalar(-2.0));
            assert_eq!(t.rhs, vec![3.0]);
        }
    }

    #[test]
    fn zero_row_is_rank_deficient() {
        let a = rows(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let spec = TransformSpec {
            transforms: vec![rows(&[&[1.0, 0.0], &[0.0, 0.0]]), Mat::identity(2)],
        };
        assert_eq!(
            apply_transform(&spec, &a, &[0.0, 0.0], 1),
            Err(ScenarioError::RankDeficient { agent: 0 })
        );
    }
}
