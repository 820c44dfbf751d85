use std::sync::Arc;

use crate::error::{Error, Result};
use crate::generators::{Family, GeneratorMatrix};
use crate::linalg::DenseMatrix;
use crate::linear_prop::{Partition, StepInput};
use crate::measures::Grid;
use crate::scalar::Real;

/// Step factors `exp(Δt_j·A_j)`; consecutive identical steps share one factor.
#[derive(Debug)]
pub(crate) struct MatrixEngine<T> {
    pub(crate) factors: Vec<Arc<DenseMatrix<T>>>,
    pub(crate) lost_rate: T,
}

impl<T: Real> MatrixEngine<T> {
    pub(crate) fn new(
        family: &Family<T>,
        grid: &Grid<T>,
        partition: &Partition<T>,
        inputs: &[StepInput<T>],
        alpha: T,
    ) -> Result<Self> {
        if inputs.len() != partition.steps() {
            return Err(Error::Dimension(format!(
                "{} step inputs for {} steps",
                inputs.len(),
                partition.steps()
            )));
        }
        family.validate()?;
        let mut factors: Vec<Arc<DenseMatrix<T>>> = Vec::with_capacity(inputs.len());
        let mut previous: Option<(T, DenseMatrix<T>)> = None;
        let mut lost_rate = T::zero();
        for (j, input) in inputs.iter().enumerate() {
            let GeneratorMatrix { matrix, lost_rate: lost } =
                family.generator(grid, input.time, &input.moments, alpha)?;
            lost_rate = lost_rate.max(lost);
            let dt = partition.dt(j);
            if let Some((pdt, pa)) = &previous {
                if *pdt == dt && *pa == matrix {
                    factors.push(factors[j - 1].clone());
                    continue;
                }
            }
            factors.push(Arc::new(matrix.scaled(dt).expm()?));
            previous = Some((dt, matrix));
        }
        Ok(Self { factors, lost_rate })
    }

    /// Engine from precomputed step factors.
    pub(crate) fn from_factors(factors: Vec<DenseMatrix<T>>) -> Self {
        Self {
            factors: factors.into_iter().map(Arc::new).collect(),
            lost_rate: T::zero(),
        }
    }

    pub(crate) fn apply(&self, f: &[T], a: usize, b: usize) -> Vec<T> {
        let mut v = f.to_vec();
        for j in (a..b).rev() {
            v = self.factors[j].matvec(&v);
        }
        v
    }

    pub(crate) fn dual_apply(&self, w: &[T], a: usize, b: usize) -> Vec<T> {
        let mut v = w.to_vec();
        for j in a..b {
            v = self.factors[j].matvec_transpose(&v);
        }
        v
    }
}
