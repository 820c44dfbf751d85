use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::Family;
use crate::linear_prop::Partition;
use crate::measures::{dual_norm, GridMeasure};
use crate::nonlinear::{solve_kinetic_on, KineticOptions, KineticSolution};
use crate::scalar::Real;
use crate::sensitivity::linearized_propagate;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdRow {
    pub h: f64,
    /// `max_t dual_norm(D_h(t), ξ_t, 2)` over the sampled nodes.
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdReport {
    pub rows: Vec<FdRow>,
    /// Least-squares slope of `log defect` against `log h`.
    pub fitted_order: Option<f64>,
    /// `dual_norm(μ^α − μ^{α−H} − H·ξ[α−H/2], 0, 2)` at the final node, `H` the largest step.
    pub integral_defect: f64,
}

fn sampled(len: usize, samples: usize) -> Vec<usize> {
    let count = samples.max(1).min(len - 1);
    let mut v: Vec<usize> = (1..=count).map(|k| (k * (len - 1)).div_ceil(count)).collect();
    v.dedup();
    v
}

/// Richardson-extrapolated central difference of the initial data in `α`.
pub fn initial_alpha_derivative<T: Real>(
    mu0: &dyn Fn(T) -> Result<GridMeasure<T>>,
    alpha: T,
) -> Result<GridMeasure<T>> {
    let central = |h: T| -> Result<GridMeasure<T>> {
        let d = mu0(alpha + h)?.sub(&mu0(alpha - h)?)?;
        Ok(d.scaled(T::one() / (T::lit(2.0) * h)))
    };
    let h = T::lit(1e-3);
    let coarse = central(h)?;
    let fine = central(h * T::lit(0.5))?;
    fine.combine(T::lit(4.0 / 3.0), &coarse, T::lit(-1.0 / 3.0))
}

fn with_alpha<T: Real>(options: &KineticOptions<T>, alpha: T) -> KineticOptions<T> {
    KineticOptions {
        alpha,
        ..options.clone()
    }
}

/// Central differences of solver runs against the linearized curve, for each step in `h_list`.
pub fn fd_validate<T: Real>(
    family: &Family<T>,
    mu0_of_alpha: &dyn Fn(T) -> Result<GridMeasure<T>>,
    alpha: T,
    h_list: &[T],
    partition: &Partition<T>,
    options: &KineticOptions<T>,
    samples: usize,
) -> Result<FdReport> {
    if h_list.is_empty() || h_list.iter().any(|&h| h <= T::zero()) || h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("h_list must be positive and strictly decreasing".into()));
    }
    let solve = |a: T| -> Result<KineticSolution<T>> { solve_kinetic_on(family, &mu0_of_alpha(a)?, partition, &with_alpha(options, a)) };
    let base = solve(alpha)?;
    let xi = linearized_propagate(&base, &initial_alpha_derivative(mu0_of_alpha, alpha)?)?;
    let nodes = sampled(partition.len(), samples);
    let mut rows = Vec::with_capacity(h_list.len());
    let mut lowest = None;
    for &h in h_list {
        let plus = solve(alpha + h)?;
        let minus = solve(alpha - h)?;
        let mut defect = 0.0f64;
        for &j in &nodes {
            let d = plus.curve.values()[j]
                .sub(&minus.curve.values()[j])?
                .scaled(T::one() / (T::lit(2.0) * h));
            defect = defect.max(dual_norm(&d, &xi.curve.values()[j], 2)?.to_f64_lossy());
        }
        rows.push(FdRow {
            h: h.to_f64_lossy(),
            defect,
        });
        if lowest.is_none() {
            lowest = Some(minus);
        }
    }
    if rows.len() >= 2 && rows.windows(2).all(|w| w[1].defect >= w[0].defect) && rows[0].defect > 0.0 {
        return Err(Error::Invariant(format!(
            "finite-difference defect never decreases ({:?}); solver tolerance too loose or family not smooth",
            rows.iter().map(|r| r.defect).collect::<Vec<_>>()
        )));
    }
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.defect > 0.0)
        .map(|r| (r.h.ln(), r.defect.ln()))
        .collect();
    let fitted_order = (usable.len() >= 2).then(|| {
        let n = usable.len() as f64;
        let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
        let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    let big = h_list[0];
    let lower = lowest.expect("nonempty h_list");
    let mid_alpha = alpha - big * T::lit(0.5);
    let mid = solve(mid_alpha)?;
    let mid_xi = linearized_propagate(&mid, &initial_alpha_derivative(mu0_of_alpha, mid_alpha)?)?;
    let gap = base
        .final_measure()
        .sub(lower.final_measure())?
        .combine(T::one(), mid_xi.curve.last(), -big)?;
    let integral_defect = dual_norm(&gap, &GridMeasure::zeros(*gap.grid()), 2)?.to_f64_lossy();
    Ok(FdReport {
        rows,
        fitted_order,
        integral_defect,
    })
}
