use crate::error::{Error, Result};
use crate::generators::{Family, LevyFamily};
use crate::linalg::DenseMatrix;
use crate::linear_prop::matrix::MatrixEngine;
use crate::linear_prop::spectral::SpectralEngine;
use crate::linear_prop::{Freeze, Partition, StepInput};
use crate::measures::{Curve, Grid, GridMeasure, TestFunction};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Spectral,
    Matrix,
    DenseOracle,
}

#[derive(Debug)]
pub(crate) enum Engine<T> {
    Spectral(SpectralEngine<T>),
    Matrix(MatrixEngine<T>),
}

/// Frozen-curve propagators `U^{t,s}` on functions and `V^{s,t}` on measures over a partition.
#[derive(Debug)]
pub struct Propagator<T> {
    kind: EngineKind,
    grid: Grid<T>,
    partition: Partition<T>,
    family: Family<T>,
    inputs: Vec<StepInput<T>>,
    alpha: T,
    pub(crate) engine: Engine<T>,
}

impl<T: Real> Propagator<T> {
    /// Spectral engine for a Lévy family frozen along `curve`.
    pub fn build_spectral(
        family: &LevyFamily<T>,
        curve: &Curve<T>,
        partition: &Partition<T>,
        alpha: T,
        freeze: Freeze,
    ) -> Result<Self> {
        let fam = Family::Levy(family.clone());
        let inputs = StepInput::from_curve(&fam, curve, partition, freeze)?;
        Self::spectral_from_inputs(family, curve.grid(), partition, inputs, alpha)
    }

    /// Matrix engine for any family with a matrix form, frozen along `curve`.
    pub fn build_matrix(
        family: &Family<T>,
        curve: &Curve<T>,
        partition: &Partition<T>,
        alpha: T,
        freeze: Freeze,
    ) -> Result<Self> {
        let inputs = StepInput::from_curve(family, curve, partition, freeze)?;
        Self::matrix_from_inputs(family, curve.grid(), partition, inputs, alpha)
    }

    pub fn spectral_from_inputs(
        family: &LevyFamily<T>,
        grid: &Grid<T>,
        partition: &Partition<T>,
        inputs: Vec<StepInput<T>>,
        alpha: T,
    ) -> Result<Self> {
        let engine = SpectralEngine::new(family, grid, partition, &inputs, alpha)?;
        Ok(Self {
            kind: EngineKind::Spectral,
            grid: *grid,
            partition: partition.clone(),
            family: Family::Levy(family.clone()),
            inputs,
            alpha,
            engine: Engine::Spectral(engine),
        })
    }

    pub fn matrix_from_inputs(
        family: &Family<T>,
        grid: &Grid<T>,
        partition: &Partition<T>,
        inputs: Vec<StepInput<T>>,
        alpha: T,
    ) -> Result<Self> {
        let engine = MatrixEngine::new(family, grid, partition, &inputs, alpha)?;
        Ok(Self {
            kind: EngineKind::Matrix,
            grid: *grid,
            partition: partition.clone(),
            family: family.clone(),
            inputs,
            alpha,
            engine: Engine::Matrix(engine),
        })
    }

    /// Handle over externally computed step propagators (one `n×n` matrix per subinterval).
    pub fn from_step_matrices(
        kind: EngineKind,
        family: &Family<T>,
        grid: &Grid<T>,
        partition: &Partition<T>,
        inputs: Vec<StepInput<T>>,
        alpha: T,
        factors: Vec<DenseMatrix<T>>,
    ) -> Result<Self> {
        if factors.len() != partition.steps() || inputs.len() != partition.steps() {
            return Err(Error::Dimension("one factor and one input per step expected".into()));
        }
        if factors.iter().any(|m| m.rows() != grid.len() || m.cols() != grid.len()) {
            return Err(Error::Dimension("step factor shape differs from the grid".into()));
        }
        Ok(Self {
            kind,
            grid: *grid,
            partition: partition.clone(),
            family: family.clone(),
            inputs,
            alpha,
            engine: Engine::Matrix(MatrixEngine::from_factors(factors)),
        })
    }

    pub fn kind(&self) -> EngineKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn partition(&self) -> &Partition<T> {
        &self.partition
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn inputs(&self) -> &[StepInput<T>] {
        &self.inputs
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Largest rate of jumps dropped at the grid edge (matrix engine).
    pub fn lost_rate(&self) -> T {
        match &self.engine {
            Engine::Matrix(m) => m.lost_rate,
            Engine::Spectral(_) => T::zero(),
        }
    }

    fn interval(&self, t: T, s: T) -> Result<(usize, usize)> {
        let a = self.partition.index_of(t)?;
        let b = self.partition.index_of(s)?;
        if a > b {
            return Err(Error::InvalidArgument(format!("propagator interval [{t}, {s}] is reversed")));
        }
        Ok((a, b))
    }

    /// Node-vector form of `U^{t_a, t_b}` for node indices `a ≤ b`.
    pub fn apply_between(&self, f: &[T], a: usize, b: usize) -> Vec<T> {
        match &self.engine {
            Engine::Spectral(e) => e.apply(f, a, b),
            Engine::Matrix(e) => e.apply(f, a, b),
        }
    }

    /// Node-vector form of `V^{t_b, t_a}` for node indices `a ≤ b`.
    pub fn dual_between(&self, w: &[T], a: usize, b: usize) -> Vec<T> {
        match &self.engine {
            Engine::Spectral(e) => e.dual_apply(w, a, b),
            Engine::Matrix(e) => e.dual_apply(w, a, b),
        }
    }

    /// `U^{t,s} f` for partition nodes `t ≤ s`.
    pub fn apply(&self, f: &TestFunction<T>, t: T, s: T) -> Result<TestFunction<T>> {
        self.grid.require_same(f.grid())?;
        let (a, b) = self.interval(t, s)?;
        f.with_values(self.apply_between(f.values(), a, b))
    }

    /// `V^{s,t} μ` for partition nodes `s ≥ t`.
    pub fn dual_apply(&self, mu: &GridMeasure<T>, s: T, t: T) -> Result<GridMeasure<T>> {
        self.grid.require_same(mu.grid())?;
        let (a, b) = self.interval(t, s)?;
        GridMeasure::new(self.grid, self.dual_between(mu.weights(), a, b))
    }

    /// `V^{t_j, t_a} μ` for every node `j ≥ a`.
    pub fn propagate(&self, mu: &GridMeasure<T>, from: usize) -> Result<Vec<GridMeasure<T>>> {
        self.grid.require_same(mu.grid())?;
        let mut out = Vec::with_capacity(self.partition.len() - from);
        out.push(mu.clone());
        match &self.engine {
            Engine::Matrix(e) => {
                let mut w = mu.weights().to_vec();
                for j in from..self.partition.steps() {
                    w = e.factors[j].matvec_transpose(&w);
                    out.push(GridMeasure::new(self.grid, w.clone())?);
                }
            }
            Engine::Spectral(e) => {
                for j in from + 1..self.partition.len() {
                    out.push(GridMeasure::new(self.grid, e.dual_apply(mu.weights(), from, j))?);
                }
            }
        }
        Ok(out)
    }

    /// The curve `t_j ↦ V^{t_j, t_0} μ` on all partition nodes.
    pub fn propagate_curve(&self, mu: &GridMeasure<T>) -> Result<Curve<T>> {
        Curve::new(self.partition.nodes().to_vec(), self.propagate(mu, 0)?)
    }

    /// Generator matrix of step `j` (matrix families only).
    pub fn step_generator(&self, j: usize) -> Result<DenseMatrix<T>> {
        let input = &self.inputs[j];
        Ok(self.family.generator(&self.grid, input.time, &input.moments, self.alpha)?.matrix)
    }

    /// Frozen symbol of step `j` on the engine's frequency lattice (spectral engine only).
    pub fn step_symbol(&self, j: usize) -> Result<Vec<num_complex::Complex<T>>> {
        match (&self.engine, &self.family) {
            (Engine::Spectral(e), Family::Levy(f)) => {
                let input = &self.inputs[j];
                Ok(e.basis.combine(&f.scalars(input.time, &input.moments, self.alpha), true))
            }
            _ => Err(Error::Unsupported("step symbols exist for the spectral engine only".into())),
        }
    }

    pub(crate) fn spectral(&self) -> Option<&SpectralEngine<T>> {
        match &self.engine {
            Engine::Spectral(e) => Some(e),
            Engine::Matrix(_) => None,
        }
    }
}
