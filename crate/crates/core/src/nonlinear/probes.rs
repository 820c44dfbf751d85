use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{generator_distance, Family};
use crate::linear_prop::Partition;
use crate::measures::{dual_norm, max_dual_norm, GridMeasure};
use crate::nonlinear::{solve_kinetic_on, KineticOptions, KineticSolution};
use crate::scalar::Real;

/// Evenly spread node indices `1..len`, at most `count` of them, always including the last.
fn sample_nodes(len: usize, count: usize) -> Vec<usize> {
    let count = count.max(1).min(len - 1);
    let mut out: Vec<usize> = (1..=count).map(|k| (k * (len - 1)).div_ceil(count)).collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemigroupRow {
    pub t: f64,
    pub s: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemigroupReport {
    pub rows: Vec<SemigroupRow>,
}

impl SemigroupReport {
    pub fn max_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.defect).fold(0.0, f64::max)
    }
}

/// `dual_norm(T_s(T_t μ), T_{t+s} μ, 2)` for node pairs `(t, s)` of a solution.
///
/// `T_s` restarted at `t` is solved afresh on the nodes of `solution.partition` between `t` and `t + s`.
pub fn semigroup_check<T: Real>(solution: &KineticSolution<T>, pairs: &[(T, T)]) -> Result<SemigroupReport> {
    let p = &solution.partition;
    let mut rows = Vec::with_capacity(pairs.len());
    for &(t, s) in pairs {
        let a = p.index_of(p.start() + t)?;
        let b = p.index_of(p.start() + t + s)?;
        if b < a {
            return Err(Error::InvalidArgument(format!("negative increment s = {s}")));
        }
        let defect = if a == b || a == 0 {
            T::zero()
        } else {
            let restart = solve_kinetic_on(
                &solution.family,
                &solution.curve.values()[a],
                &p.slice(a, b)?,
                &solution.options,
            )?;
            dual_norm(restart.final_measure(), &solution.curve.values()[b], 2)?
        };
        rows.push(SemigroupRow {
            t: t.to_f64_lossy(),
            s: s.to_f64_lossy(),
            defect: defect.to_f64_lossy(),
        });
    }
    Ok(SemigroupReport { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzRow {
    pub time: f64,
    /// `dual_norm(T_t μ, T_t η, 2) / dual_norm(μ, η, 2)`; absent for coincident inputs.
    pub ratio: Option<f64>,
    /// `dual_norm(T_t μ, μ, 2) / t`
    pub continuity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub initial_distance: f64,
    pub rows: Vec<LipschitzRow>,
}

impl LipschitzReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio).reduce(f64::max)
    }

    pub fn max_continuity(&self) -> f64 {
        self.rows.iter().map(|r| r.continuity).fold(0.0, f64::max)
    }

    /// Smallest `c` with `ratio(t) ≤ e^{c t}` on every row.
    pub fn envelope_exponent(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.ratio.map(|q| q.max(f64::MIN_POSITIVE).ln() / r.time))
            .reduce(f64::max)
    }
}

/// Lipschitz dependence on initial data and continuity in time, at up to `samples` nodes.
pub fn lipschitz_probe<T: Real>(
    family: &Family<T>,
    mu: &GridMeasure<T>,
    eta: &GridMeasure<T>,
    partition: &Partition<T>,
    options: &KineticOptions<T>,
    samples: usize,
) -> Result<LipschitzReport> {
    mu.grid().require_same(eta.grid())?;
    let sm = solve_kinetic_on(family, mu, partition, options)?;
    let initial = dual_norm(mu, eta, 2)?.to_f64_lossy();
    let se = if initial > 0.0 {
        Some(solve_kinetic_on(family, eta, partition, options)?)
    } else {
        log::info!("coincident initial data; ratio rows skipped");
        None
    };
    let mut rows = Vec::new();
    for j in sample_nodes(partition.len(), samples) {
        let t = (partition.nodes()[j] - partition.start()).to_f64_lossy();
        let a = &sm.curve.values()[j];
        let ratio = match &se {
            Some(se) => Some(dual_norm(a, &se.curve.values()[j], 2)?.to_f64_lossy() / initial),
            None => None,
        };
        rows.push(LipschitzRow {
            time: t,
            ratio,
            continuity: dual_norm(a, mu, 2)?.to_f64_lossy() / t,
        });
    }
    Ok(LipschitzReport {
        initial_distance: initial,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `sup_t dual_norm(T̃_t η, T_t μ, 2)` over all nodes.
    pub sup_distance: f64,
    pub argmax_time: f64,
    /// Generator distance over both solution curves at up to the sampled nodes.
    pub kappa_hat: f64,
    pub initial_distance: f64,
    /// `sup_distance / (κ̂ + initial_distance)`
    pub ratio: Option<f64>,
}

/// Compares `T_t μ` under `family_a` with `T̃_t η` under `family_b`.
pub fn stability_compare<T: Real>(
    family_a: &Family<T>,
    family_b: &Family<T>,
    mu: &GridMeasure<T>,
    eta: &GridMeasure<T>,
    partition: &Partition<T>,
    options: &KineticOptions<T>,
    samples: usize,
) -> Result<StabilityReport> {
    let grid = *mu.grid();
    grid.require_same(eta.grid())?;
    if family_a.functionals().len() != family_b.functionals().len() {
        log::debug!("families use different moment functionals");
    }
    let sa = solve_kinetic_on(family_a, mu, partition, options)?;
    let sb = solve_kinetic_on(family_b, eta, partition, options)?;
    let (sup, arg) = max_dual_norm(sb.curve.values(), sa.curve.values(), 2)?;
    let mut kappa = T::zero();
    let alpha = options.alpha;
    let mut idx = sample_nodes(partition.len(), samples);
    idx.insert(0, 0);
    for j in idx {
        let t = partition.nodes()[j];
        for xi in [&sa.curve.values()[j], &sb.curve.values()[j]] {
            let ma = family_a.moments(xi)?;
            let mb = family_b.moments(xi)?;
            kappa = kappa.max(generator_distance(family_b, family_a, &grid, t, &mb, &ma, alpha)?);
        }
    }
    let initial = dual_norm(mu, eta, 2)?.to_f64_lossy();
    let sup = sup.to_f64_lossy();
    let kappa = kappa.to_f64_lossy();
    let denom = kappa + initial;
    Ok(StabilityReport {
        sup_distance: sup,
        argmax_time: partition.nodes()[arg].to_f64_lossy(),
        kappa_hat: kappa,
        initial_distance: initial,
        ratio: (denom > 0.0).then(|| sup / denom),
    })
}
