use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::assembly::{add_diffusion, add_jumps, add_upwind, report_lost_rate};
use crate::generators::order_one::{LocalCoefficients, Slot};
use crate::generators::{LevyCoefficients, LevyFamily, OrderOneFamily, Profile};
use crate::linalg::DenseMatrix;
use crate::measures::{Grid, GridMeasure, TestFunction};
use crate::scalar::{dot, Real};

/// Dense generator acting on test-function values; measures evolve by its transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorMatrix<T> {
    pub matrix: DenseMatrix<T>,
    /// Largest per-node rate of jumps dropped at the grid edge.
    pub lost_rate: T,
}

/// A generator family of either supported kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub enum Family<T> {
    Levy(LevyFamily<T>),
    OrderOne(OrderOneFamily<T>),
}

impl<T: Real> From<LevyFamily<T>> for Family<T> {
    fn from(f: LevyFamily<T>) -> Self {
        Family::Levy(f)
    }
}

impl<T: Real> From<OrderOneFamily<T>> for Family<T> {
    fn from(f: OrderOneFamily<T>) -> Self {
        Family::OrderOne(f)
    }
}

/// Matrix of a Lévy triplet: `(G/2)D²`, upwind effective drift, translated jumps.
/// The upwind direction follows `dir` (the frozen effective drift).
pub(crate) fn levy_matrix<T: Real>(grid: &Grid<T>, c: &LevyCoefficients<T>, dir: T) -> Result<(DenseMatrix<T>, T)> {
    grid.require_1d("Lévy generator assembly")?;
    if c.stable.is_some_and(|s| s.scale != T::zero()) {
        return Err(Error::Unsupported(
            "stable symbols have no matrix form; use the spectral engine".into(),
        ));
    }
    let n = grid.n();
    let h = grid.spacing();
    let mut m = DenseMatrix::zeros(n, n);
    if c.diffusion != T::zero() {
        add_diffusion(&mut m, h, c.diffusion);
    }
    let b = c.effective_drift();
    if b != T::zero() {
        for i in 0..n {
            add_upwind(&mut m, i, h, b, dir);
        }
    }
    let mut lost = T::zero();
    for i in 0..n {
        lost = lost.max(add_jumps(&mut m, grid, i, T::one(), &c.jumps));
    }
    Ok((m, lost))
}

impl<T: Real> Family<T> {
    pub fn functionals(&self) -> &[Profile<T>] {
        match self {
            Family::Levy(f) => &f.functionals,
            Family::OrderOne(f) => &f.functionals,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Family::Levy(f) => f.validate(),
            Family::OrderOne(f) => f.validate(),
        }
    }

    pub fn as_levy(&self) -> Option<&LevyFamily<T>> {
        match self {
            Family::Levy(f) => Some(f),
            Family::OrderOne(_) => None,
        }
    }

    pub fn as_order_one(&self) -> Option<&OrderOneFamily<T>> {
        match self {
            Family::OrderOne(f) => Some(f),
            Family::Levy(_) => None,
        }
    }

    pub fn is_measure_independent(&self) -> bool {
        match self {
            Family::Levy(f) => f.is_measure_independent(),
            Family::OrderOne(f) => f.is_measure_independent(),
        }
    }

    pub fn is_alpha_independent(&self) -> bool {
        match self {
            Family::Levy(f) => f.is_alpha_independent(),
            Family::OrderOne(f) => f.is_alpha_independent(),
        }
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            Family::Levy(f) => f.is_time_independent(),
            Family::OrderOne(f) => f.is_time_independent(),
        }
    }

    /// Moment functionals evaluated on the grid as test functions.
    pub fn functional_values(&self, grid: &Grid<T>) -> Result<Vec<TestFunction<T>>> {
        self.functionals().iter().map(|p| p.test_function(grid)).collect()
    }

    /// `c_j = (φ_j, μ)`
    pub fn moments(&self, mu: &GridMeasure<T>) -> Result<Vec<T>> {
        self.functionals()
            .iter()
            .map(|p| Ok(dot(&p.values(mu.grid())?, mu.weights())))
            .collect()
    }

    pub(crate) fn matrix_slot(&self, grid: &Grid<T>, slot: Slot, t: T, m: &[T], alpha: T) -> Result<(DenseMatrix<T>, T)> {
        match self {
            Family::OrderOne(f) => f.matrix_slot(grid, slot, t, m, alpha),
            Family::Levy(f) => {
                let base = f.coefficients_at(t, m, alpha);
                let dir = base.effective_drift();
                match slot {
                    Slot::Value => levy_matrix(grid, &base, dir),
                    Slot::Moment(j) => levy_matrix(grid, &f.triplet(&f.d_moment_scalars(t, m, alpha, j), false), dir),
                    Slot::Alpha => levy_matrix(grid, &f.triplet(&f.d_alpha_scalars(t, m), false), dir),
                }
            }
        }
    }

    /// `A[μ]` at time `t` for moments `m`.
    pub fn generator(&self, grid: &Grid<T>, t: T, m: &[T], alpha: T) -> Result<GeneratorMatrix<T>> {
        let (matrix, lost_rate) = self.matrix_slot(grid, Slot::Value, t, m, alpha)?;
        report_lost_rate(lost_rate, "generator assembly");
        Ok(GeneratorMatrix { matrix, lost_rate })
    }

    /// `∂A/∂c_j`
    pub fn moment_derivative(&self, grid: &Grid<T>, t: T, m: &[T], alpha: T, j: usize) -> Result<DenseMatrix<T>> {
        Ok(self.matrix_slot(grid, Slot::Moment(j), t, m, alpha)?.0)
    }

    /// `∂A/∂α`
    pub fn alpha_derivative(&self, grid: &Grid<T>, t: T, m: &[T], alpha: T) -> Result<DenseMatrix<T>> {
        Ok(self.matrix_slot(grid, Slot::Alpha, t, m, alpha)?.0)
    }

    /// Pointwise coefficients at `x` for particle simulation.
    pub fn local(&self, grid: &Grid<T>, t: T, m: &[T], alpha: T, x: T) -> Result<LocalCoefficients<T>> {
        match self {
            Family::OrderOne(f) => Ok(f.local(grid, t, m, alpha, x)),
            Family::Levy(f) => {
                if f.stable.is_some_and(|s| s.scale != T::zero()) {
                    return Err(Error::Unsupported("particle simulation of stable symbols".into()));
                }
                let c = f.coefficients_at(t, m, alpha);
                Ok(LocalCoefficients {
                    diffusion: c.diffusion,
                    drift: c.effective_drift(),
                    jumps: c.jumps.iter().collect(),
                })
            }
        }
    }
}

/// `A[μ]` for an order-one family at time `t` and parameter `α`.
pub fn assemble_matrix<T: Real>(
    family: &OrderOneFamily<T>,
    mu: &GridMeasure<T>,
    t: T,
    alpha: T,
) -> Result<GeneratorMatrix<T>> {
    let fam = Family::OrderOne(family.clone());
    let m = fam.moments(mu)?;
    fam.generator(mu.grid(), t, &m, alpha)
}

/// `D_ξA[μ] = Σ_j (φ_j, ξ)·∂A/∂c_j`
pub fn gateaux<T: Real>(
    family: &Family<T>,
    mu: &GridMeasure<T>,
    xi: &GridMeasure<T>,
    t: T,
    alpha: T,
) -> Result<DenseMatrix<T>> {
    mu.grid().require_same(xi.grid())?;
    let grid = mu.grid();
    let m = family.moments(mu)?;
    let dm = family.moments(xi)?;
    let n = grid.n();
    let mut out = DenseMatrix::zeros(n, n);
    for (j, &w) in dm.iter().enumerate() {
        if w != T::zero() {
            out.axpy(w, &family.moment_derivative(grid, t, &m, alpha, j)?);
        }
    }
    Ok(out)
}

/// Symbol-level Gateaux derivative of a Lévy family: the triplet increment `D_ξ(G, b, ν)`.
pub fn levy_gateaux<T: Real>(
    family: &LevyFamily<T>,
    mu: &GridMeasure<T>,
    xi: &GridMeasure<T>,
    t: T,
    alpha: T,
) -> Result<LevyCoefficients<T>> {
    let fam = Family::Levy(family.clone());
    let m = fam.moments(mu)?;
    let dm = fam.moments(xi)?;
    let mut acc = family.d_moment_scalars(t, &m, alpha, 0);
    for v in [&mut acc.diffusion, &mut acc.drift] {
        *v = T::zero();
    }
    acc.intensities.iter_mut().for_each(|v| *v = T::zero());
    for (j, &w) in dm.iter().enumerate() {
        let d = family.d_moment_scalars(t, &m, alpha, j);
        acc.diffusion = acc.diffusion + w * d.diffusion;
        acc.drift = acc.drift + w * d.drift;
        for (a, b) in acc.intensities.iter_mut().zip(&d.intensities) {
            *a = *a + w * *b;
        }
    }
    Ok(family.triplet(&acc, false))
}

/// Finite-rank operator `g ↦ Σ_j left_j·⟨right_j, g⟩` on node vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOperator<T> {
    pub left: Vec<Vec<T>>,
    pub right: Vec<Vec<T>>,
}

impl<T: Real> RankOperator<T> {
    pub fn zero() -> Self {
        Self {
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.left.len()
    }

    pub fn apply(&self, g: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); g.len()];
        for (l, r) in self.left.iter().zip(&self.right) {
            let c = dot(r, g);
            crate::scalar::axpy(c, l, &mut out);
        }
        out
    }

    /// Transpose action `ξ ↦ Σ_j right_j·⟨left_j, ξ⟩`.
    pub fn apply_dual(&self, xi: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); xi.len()];
        for (l, r) in self.left.iter().zip(&self.right) {
            let c = dot(l, xi);
            crate::scalar::axpy(c, r, &mut out);
        }
        out
    }

    pub fn to_matrix(&self, n: usize) -> DenseMatrix<T> {
        DenseMatrix::from_fn(n, n, |i, k| {
            self.left
                .iter()
                .zip(&self.right)
                .map(|(l, r)| l[i] * r[k])
                .sum()
        })
    }

    /// `sup_{‖g‖_∞ ≤ 1} ‖F g‖_∞`
    pub fn norm_inf(&self, n: usize) -> T {
        self.to_matrix(n).norm_inf()
    }
}

/// `F[μ]g = Σ_j φ_j·(∂A/∂c_j g, μ)`, so that `(D_ξA[μ]g, μ) = (F[μ]g, ξ)`.
pub fn dual_representation<T: Real>(
    family: &Family<T>,
    mu: &GridMeasure<T>,
    t: T,
    alpha: T,
) -> Result<RankOperator<T>> {
    let grid = mu.grid();
    let m = family.moments(mu)?;
    dual_representation_at(family, grid, mu.weights(), &m, t, alpha)
}

pub(crate) fn dual_representation_at<T: Real>(
    family: &Family<T>,
    grid: &Grid<T>,
    weights: &[T],
    m: &[T],
    t: T,
    alpha: T,
) -> Result<RankOperator<T>> {
    let mut op = RankOperator::zero();
    for (j, p) in family.functionals().iter().enumerate() {
        let d = family.moment_derivative(grid, t, m, alpha, j)?;
        let right = d.matvec_transpose(weights);
        if right.iter().all(|v| *v == T::zero()) {
            continue;
        }
        op.left.push(p.values(grid)?);
        op.right.push(right);
    }
    Ok(op)
}
