use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::generators::Family;
use crate::linalg::DenseMatrix;
use crate::linear_prop::{Freeze, Propagator, StepInput};
use crate::measures::{Curve, GridMeasure};
use crate::nonlinear::{build_engine, KineticSolution};
use crate::scalar::{axpy, dot, Real};

/// Sensitivity curve `ξ_t` on the nodes of the base solution.
#[derive(Clone, Debug)]
pub struct SensitivityRun<T> {
    pub curve: Curve<T>,
    pub alpha_source: bool,
}

impl<T: Real> SensitivityRun<T> {
    /// `max_t |(1, ξ_t)|`
    pub fn mass_defect(&self) -> f64 {
        self.curve
            .values()
            .iter()
            .map(|x| x.mass().abs().to_f64_lossy())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `time,node,xi_weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,node,xi_weight\n");
        let grid = self.curve.grid();
        for (t, xi) in self.curve.times().iter().zip(self.curve.values()) {
            for (i, w) in xi.weights().iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{:.16e},{:.16e},{:.16e}",
                    t.to_f64_lossy(),
                    grid.node(i).to_f64_lossy(),
                    w.to_f64_lossy()
                );
            }
        }
        s
    }
}

/// Linearization of the discrete solver recurrence `μ_{j+1} = S_j[m_j] μ_j` along a base solution.
struct Tangent<'a, T> {
    base: &'a KineticSolution<T>,
    prop: Propagator<T>,
    inputs: Vec<StepInput<T>>,
    functionals: Vec<Vec<T>>,
}

impl<'a, T: Real> Tangent<'a, T> {
    fn new(base: &'a KineticSolution<T>) -> Result<Self> {
        let family = &base.family;
        let grid = *base.curve.grid();
        let inputs = StepInput::from_curve(family, &base.curve, &base.partition, base.options.freeze)?;
        let prop = build_engine(
            family,
            &grid,
            &base.partition,
            inputs.clone(),
            base.options.alpha,
            base.options.engine,
        )?;
        let functionals = family
            .functional_values(&grid)?
            .into_iter()
            .map(|f| f.into_values())
            .collect();
        Ok(Self {
            base,
            prop,
            inputs,
            functionals,
        })
    }

    fn moments(&self, xi: &[T]) -> Vec<T> {
        self.functionals.iter().map(|phi| dot(phi, xi)).collect()
    }

    /// `∂_{m_k} S_j μ_j` for every functional `k`, and `∂_α S_j μ_j` when requested.
    fn derivatives(&self, j: usize, mu: &[T], alpha_source: bool) -> Result<(Vec<Vec<T>>, Option<Vec<T>>)> {
        let family = &self.base.family;
        let alpha = self.base.options.alpha;
        let input = &self.inputs[j];
        let (t, m) = (input.time, &input.moments);
        let dt = self.base.partition.dt(j);
        let k_count = self.functionals.len();
        let measure_dependent = !family.is_measure_independent();
        let want_alpha = alpha_source && !family.is_alpha_independent();
        if let (Some(engine), Family::Levy(lf)) = (self.prop.spectral(), family) {
            let mut q = Vec::with_capacity(k_count);
            if measure_dependent {
                for k in 0..k_count {
                    let d = engine.basis.combine(&lf.d_moment_scalars(t, m, alpha, k), false);
                    q.push(engine.dual_step_derivative(mu, j, &d, dt));
                }
            }
            let qa = want_alpha.then(|| {
                let d = engine.basis.combine(&lf.d_alpha_scalars(t, m), false);
                engine.dual_step_derivative(mu, j, &d, dt)
            });
            return Ok((q, qa));
        }
        let grid = self.base.curve.grid();
        let a = family.generator(grid, t, m, alpha)?.matrix.scaled(dt);
        let along = |d: DenseMatrix<T>| -> Result<Vec<T>> {
            let (_, l) = a.expm_frechet(&d.scaled(dt))?;
            Ok(l.matvec_transpose(mu))
        };
        let mut q = Vec::with_capacity(k_count);
        if measure_dependent {
            for k in 0..k_count {
                q.push(along(family.moment_derivative(grid, t, m, alpha, k)?)?);
            }
        }
        let qa = if want_alpha {
            Some(along(family.alpha_derivative(grid, t, m, alpha)?)?)
        } else {
            None
        };
        Ok((q, qa))
    }

    fn run(&self, xi0: &GridMeasure<T>, alpha_source: bool) -> Result<SensitivityRun<T>> {
        let grid = *self.base.curve.grid();
        grid.require_same(xi0.grid())?;
        let steps = self.base.partition.steps();
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(steps + 1);
        out.push(xi0.clone());
        let mut xi = xi0.weights().to_vec();
        for j in 0..steps {
            let mu = self.base.curve.values()[j].weights();
            let (q, qa) = self.derivatives(j, mu, alpha_source)?;
            let mut next = self.prop.dual_between(&xi, j, j + 1);
            if let Some(qa) = &qa {
                axpy(T::one(), qa, &mut next);
            }
            if !q.is_empty() {
                let dm = self.moments(&xi);
                match self.base.options.freeze {
                    Freeze::LeftEndpoint => {
                        for (qk, &d) in q.iter().zip(&dm) {
                            axpy(d, qk, &mut next);
                        }
                    }
                    Freeze::Midpoint => {
                        // moments of step j average the two endpoints, so ξ_{j+1} enters its own step
                        for (qk, &d) in q.iter().zip(&dm) {
                            axpy(half * d, qk, &mut next);
                        }
                        let k = q.len();
                        let sys = DenseMatrix::from_fn(k, k, |r, c| {
                            let delta = if r == c { T::one() } else { T::zero() };
                            delta - half * dot(&self.functionals[r], &q[c])
                        });
                        let rhs = DenseMatrix::from_fn(k, 1, |r, _| dot(&self.functionals[r], &next));
                        let d_next = sys.solve(&rhs)?;
                        for (c, qk) in q.iter().enumerate() {
                            axpy(half * d_next.get(c, 0), qk, &mut next);
                        }
                    }
                }
            }
            xi = next;
            out.push(GridMeasure::new(grid, xi.clone())?);
        }
        Ok(SensitivityRun {
            curve: Curve::new(self.base.partition.nodes().to_vec(), out)?,
            alpha_source,
        })
    }
}

/// `ξ_t = ∂μ_t/∂α` along `base`, started from `xi0 = ∂μ_0/∂α`.
///
/// This is the exact derivative of the discrete recurrence the solver iterates to its fixed point,
/// so it agrees with central differences of solver runs up to `O(h²)` and the solver tolerance.
pub fn linearized_propagate<T: Real>(base: &KineticSolution<T>, xi0: &GridMeasure<T>) -> Result<SensitivityRun<T>> {
    Tangent::new(base)?.run(xi0, true)
}

/// Gateaux derivative `ξ_t` of `T_t μ_0` in the zero-mass direction `xi`.
pub fn initial_data_derivative<T: Real>(base: &KineticSolution<T>, xi: &GridMeasure<T>) -> Result<SensitivityRun<T>> {
    let scale = xi
        .weights()
        .iter()
        .map(|w| w.abs())
        .fold(T::zero(), |a, b| a + b)
        .max(T::one());
    let mass = xi.mass();
    if mass.abs() > T::lit(1e-10) * scale {
        return Err(Error::InvalidArgument(format!(
            "direction has mass {mass}; derivatives within probability measures need (1, ξ) = 0"
        )));
    }
    Tangent::new(base)?.run(xi, false)
}
