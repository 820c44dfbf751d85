use crate::error::{Error, Result};
use crate::generators::RankOperator;
use crate::linalg::DenseMatrix;
use crate::scalar::Real;

/// Perturbation `F_{t_j}` given on every partition node.
#[derive(Clone, Debug)]
pub enum Perturbation<T> {
    Zero,
    Dense(Vec<DenseMatrix<T>>),
    LowRank(Vec<RankOperator<T>>),
}

impl<T: Real> Perturbation<T> {
    /// The same matrix on `nodes` nodes.
    pub fn constant(matrix: DenseMatrix<T>, nodes: usize) -> Self {
        Perturbation::Dense(vec![matrix; nodes])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Perturbation::Zero)
    }

    pub(crate) fn check(&self, nodes: usize, n: usize) -> Result<()> {
        let ok = match self {
            Perturbation::Zero => true,
            Perturbation::Dense(m) => m.len() == nodes && m.iter().all(|x| x.rows() == n && x.cols() == n),
            Perturbation::LowRank(r) => {
                r.len() == nodes && r.iter().all(|x| x.left.iter().chain(&x.right).all(|v| v.len() == n))
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "perturbation must provide one {n}x{n} operator per partition node ({nodes})"
            )))
        }
    }

    /// `F_j g`
    pub fn apply(&self, j: usize, g: &[T]) -> Vec<T> {
        match self {
            Perturbation::Zero => vec![T::zero(); g.len()],
            Perturbation::Dense(m) => m[j].matvec(g),
            Perturbation::LowRank(r) => r[j].apply(g),
        }
    }

    /// `F_j' ξ`
    pub fn apply_dual(&self, j: usize, xi: &[T]) -> Vec<T> {
        match self {
            Perturbation::Zero => vec![T::zero(); xi.len()],
            Perturbation::Dense(m) => m[j].matvec_transpose(xi),
            Perturbation::LowRank(r) => r[j].apply_dual(xi),
        }
    }

    /// `sup_j ‖F_j‖_{∞→∞}`
    pub fn norm_bound(&self, n: usize) -> T {
        match self {
            Perturbation::Zero => T::zero(),
            Perturbation::Dense(m) => m.iter().map(|x| x.norm_inf()).fold(T::zero(), T::max),
            Perturbation::LowRank(r) => r.iter().map(|x| x.norm_inf(n)).fold(T::zero(), T::max),
        }
    }
}
