use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generators::assembly::{add_jumps, add_upwind};
use crate::generators::{Coefficient, JumpMeasure, Profile};
use crate::linalg::DenseMatrix;
use crate::measures::Grid;
use crate::scalar::Real;

/// Drift component `coefficient(t, μ, α)·profile(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub struct DriftTerm<T> {
    pub coefficient: Coefficient<T>,
    pub profile: Profile<T>,
}

/// Jump component `coefficient(t, μ, α)·profile(x)·shape(y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub struct JumpTerm<T> {
    pub coefficient: Coefficient<T>,
    pub profile: Profile<T>,
    pub shape: JumpMeasure<T>,
}

/// Order-at-most-one family `A[μ]f(x) = b(x,μ)f'(x) + Σ_y [f(x+y) − f(x)]ν(x,μ,y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Deserialize<'de> + Real"
))]
pub struct OrderOneFamily<T> {
    #[serde(default)]
    pub functionals: Vec<Profile<T>>,
    #[serde(default)]
    pub drift: Vec<DriftTerm<T>>,
    #[serde(default)]
    pub jumps: Vec<JumpTerm<T>>,
}

/// Which derivative of the coefficients a matrix is assembled from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Slot {
    Value,
    Moment(usize),
    Alpha,
}

pub(crate) fn coefficient_slot<T: Real>(c: &Coefficient<T>, slot: Slot, t: T, m: &[T], alpha: T) -> T {
    match slot {
        Slot::Value => c.value(t, m, alpha),
        Slot::Moment(j) => c.d_moment(t, m, alpha, j),
        Slot::Alpha => c.d_alpha(t, m),
    }
}

impl<T: Real> OrderOneFamily<T> {
    pub fn new(functionals: Vec<Profile<T>>) -> Self {
        Self {
            functionals,
            drift: Vec::new(),
            jumps: Vec::new(),
        }
    }

    pub fn with_drift(mut self, coefficient: Coefficient<T>, profile: Profile<T>) -> Self {
        self.drift.push(DriftTerm {
            coefficient,
            profile,
        });
        self
    }

    pub fn with_jumps(mut self, coefficient: Coefficient<T>, profile: Profile<T>, shape: JumpMeasure<T>) -> Self {
        self.jumps.push(JumpTerm {
            coefficient,
            profile,
            shape,
        });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.functionals.len();
        for d in &self.drift {
            d.coefficient.check_functionals(nf, "drift")?;
        }
        for j in &self.jumps {
            j.coefficient.check_functionals(nf, "jump coefficient")?;
        }
        Ok(())
    }

    fn coefficients(&self) -> impl Iterator<Item = &Coefficient<T>> {
        self.drift
            .iter()
            .map(|d| &d.coefficient)
            .chain(self.jumps.iter().map(|j| &j.coefficient))
    }

    pub fn is_measure_independent(&self) -> bool {
        self.coefficients().all(|c| c.is_measure_independent())
    }

    pub fn is_alpha_independent(&self) -> bool {
        self.coefficients().all(|c| c.is_alpha_independent())
    }

    pub fn is_time_independent(&self) -> bool {
        self.coefficients().all(|c| c.is_time_independent())
    }

    pub(crate) fn drift_slot(&self, grid: &Grid<T>, slot: Slot, t: T, m: &[T], alpha: T) -> Result<Vec<T>> {
        let mut b = vec![T::zero(); grid.n()];
        for term in &self.drift {
            let a = coefficient_slot(&term.coefficient, slot, t, m, alpha);
            if a == T::zero() {
                continue;
            }
            for (bi, p) in b.iter_mut().zip(term.profile.values(grid)?) {
                *bi = *bi + a * p;
            }
        }
        Ok(b)
    }

    /// Drift values `b(x_i, μ)` on the nodes for moments `m`.
    pub fn drift_values(&self, grid: &Grid<T>, t: T, m: &[T], alpha: T) -> Result<Vec<T>> {
        self.drift_slot(grid, Slot::Value, t, m, alpha)
    }

    /// Matrix of the coefficient slot; upwind directions follow the frozen drift.
    pub(crate) fn matrix_slot(
        &self,
        grid: &Grid<T>,
        slot: Slot,
        t: T,
        m: &[T],
        alpha: T,
    ) -> Result<(DenseMatrix<T>, T)> {
        grid.require_1d("order-one generator assembly")?;
        let n = grid.n();
        let h = grid.spacing();
        let mut out = DenseMatrix::zeros(n, n);
        let b = self.drift_slot(grid, slot, t, m, alpha)?;
        let dir = if slot == Slot::Value {
            b.clone()
        } else {
            self.drift_slot(grid, Slot::Value, t, m, alpha)?
        };
        for i in 0..n {
            if b[i] != T::zero() {
                add_upwind(&mut out, i, h, b[i], dir[i]);
            }
        }
        let mut lost = vec![T::zero(); n];
        for term in &self.jumps {
            let a = coefficient_slot(&term.coefficient, slot, t, m, alpha);
            if a == T::zero() {
                continue;
            }
            let p = term.profile.values(grid)?;
            for (i, l) in lost.iter_mut().enumerate() {
                *l = *l + add_jumps(&mut out, grid, i, a * p[i], &term.shape);
            }
        }
        Ok((out, crate::scalar::sup_norm(&lost)))
    }

    /// Pointwise coefficients at `x` for particle simulation.
    pub fn local(&self, grid: &Grid<T>, t: T, m: &[T], alpha: T, x: T) -> LocalCoefficients<T> {
        let drift = self
            .drift
            .iter()
            .map(|d| d.coefficient.value(t, m, alpha) * d.profile.at(grid, x))
            .sum();
        let mut jumps = Vec::new();
        for term in &self.jumps {
            let a = term.coefficient.value(t, m, alpha) * term.profile.at(grid, x);
            jumps.extend(term.shape.iter().map(|(y, w)| (y, a * w)));
        }
        LocalCoefficients {
            diffusion: T::zero(),
            drift,
            jumps,
        }
    }

    pub(crate) fn check_grid(&self, grid: &Grid<T>) -> Result<()> {
        grid.require_1d("order-one families")?;
        for p in self
            .drift
            .iter()
            .map(|d| &d.profile)
            .chain(self.jumps.iter().map(|j| &j.profile))
            .chain(self.functionals.iter())
        {
            p.values(grid)?;
        }
        Ok(())
    }
}

/// Coefficients of the generator frozen at one point, for particle updates.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalCoefficients<T> {
    pub diffusion: T,
    pub drift: T,
    /// `(displacement, rate)`; rates may be negative only for invalid families.
    pub jumps: Vec<(T, T)>,
}
