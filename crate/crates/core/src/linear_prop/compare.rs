use crate::error::{Error, Result};
use crate::generators::Family;
use crate::linear_prop::spectral::frequencies;
use crate::linear_prop::Propagator;
use crate::measures::{dual_norm, GridMeasure, TestFunction};
use crate::scalar::{sup_diff, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport<T> {
    /// `sup_f ‖(U_a − U_b) f‖_∞` over the whole interval.
    pub function_distance: T,
    /// `sup_μ dual_norm(V_a μ, V_b μ, 2)`
    pub measure_distance: T,
    /// Surrogate of `sup_j ‖A_a − A_b‖_{D→B}`, when the handles share a partition.
    pub generator_distance: Option<T>,
    /// Largest propagator distance divided by the generator distance.
    pub ratio: Option<T>,
}

/// Generator surrogate: `sup_ξ |η_a − η_b| / (1 + ξ²)` for two Lévy families, the
/// `∞`-operator norm of the matrix difference otherwise.
fn generator_distance<T: Real>(a: &Propagator<T>, b: &Propagator<T>) -> Result<Option<T>> {
    if a.partition() != b.partition() {
        return Ok(None);
    }
    let grid = a.grid();
    let mut worst = T::zero();
    match (a.family(), b.family()) {
        (Family::Levy(fa), Family::Levy(fb)) => {
            let xi = frequencies(2 * grid.n(), grid.spacing());
            let (ba, bb) = (fa.symbol_basis(&xi), fb.symbol_basis(&xi));
            for (ia, ib) in a.inputs().iter().zip(b.inputs()) {
                let ea = ba.combine(&fa.scalars(ia.time, &ia.moments, a.alpha()), true);
                let eb = bb.combine(&fb.scalars(ib.time, &ib.moments, b.alpha()), true);
                for ((x, y), k) in ea.iter().zip(&eb).zip(&xi) {
                    worst = worst.max((*x - *y).norm() / (T::one() + *k * *k));
                }
            }
        }
        _ => {
            for j in 0..a.partition().steps() {
                let (ma, mb) = (a.step_generator(j)?, b.step_generator(j)?);
                let mut d = ma;
                d.axpy(-T::one(), &mb);
                worst = worst.max(d.norm_inf());
            }
        }
    }
    Ok(Some(worst))
}

pub fn compare_propagators<T: Real>(
    a: &Propagator<T>,
    b: &Propagator<T>,
    functions: &[TestFunction<T>],
    measures: &[GridMeasure<T>],
) -> Result<ComparisonReport<T>> {
    a.grid().require_same(b.grid())?;
    let (pa, pb) = (a.partition(), b.partition());
    let span_tol = T::lit(1e-9) * (T::one() + pa.end().abs());
    if (pa.start() - pb.start()).abs() > span_tol || (pa.end() - pb.end()).abs() > span_tol {
        return Err(Error::InvalidArgument("propagators cover different intervals".into()));
    }
    let (na, nb) = (pa.len() - 1, pb.len() - 1);
    let mut function_distance = T::zero();
    for f in functions {
        let ua = a.apply_between(f.values(), 0, na);
        let ub = b.apply_between(f.values(), 0, nb);
        function_distance = function_distance.max(sup_diff(&ua, &ub));
    }
    let mut measure_distance = T::zero();
    for mu in measures {
        let va = GridMeasure::new(*a.grid(), a.dual_between(mu.weights(), 0, na))?;
        let vb = GridMeasure::new(*a.grid(), b.dual_between(mu.weights(), 0, nb))?;
        measure_distance = measure_distance.max(dual_norm(&va, &vb, 2)?);
    }
    let generator_distance = generator_distance(a, b)?;
    let ratio = generator_distance
        .filter(|g| *g > T::zero())
        .map(|g| function_distance.max(measure_distance) / g);
    Ok(ComparisonReport {
        function_distance,
        measure_distance,
        generator_distance,
        ratio,
    })
}
