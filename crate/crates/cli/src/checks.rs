use std::collections::BTreeMap;

use nlmarkov::generators::{
    estimate_levy_lipschitz, generator_distance, validate_order_one_conditions, Family, OrderOneFamily, OrderOneReport,
    Profile,
};
use nlmarkov::measures::dual_norm;
use nlmarkov::{Grid, GridMeasure};
use serde::Serialize;

use crate::scenario::Scenario;
use crate::CliError;

/// Hypothesis-checker output attached to runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub kind: &'static str,
    pub eps: f64,
    /// Coefficient distance over `dual_norm(μ, η, 2)`, maximized over sample pairs.
    pub kappa_hat: f64,
    pub kappa_pair: Option<(usize, usize)>,
    pub boundedness: f64,
    pub drift_bound: f64,
    pub gradient_bound: f64,
    pub tightness_cut: Option<f64>,
    pub tail: f64,
    pub gradient_tail: f64,
    pub small_ball_cut: Option<f64>,
    pub small_ball: f64,
    pub lipschitz_nu: f64,
    pub lipschitz_drift: f64,
    pub flags: BTreeMap<&'static str, bool>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.flags.values().all(|&f| f)
    }

    pub fn failed_flags(&self) -> Vec<&'static str> {
        self.flags.iter().filter(|(_, &v)| !v).map(|(&k, _)| k).collect()
    }
}

/// Jump and drift part of a Lévy family as an x-independent order-one family.
fn order_one_view(family: &Family<f64>) -> Result<OrderOneFamily<f64>, CliError> {
    match family {
        Family::OrderOne(f) => Ok(f.clone()),
        Family::Levy(f) => {
            if f.stable.is_some_and(|s| s.scale != 0.0) {
                return Err(CliError::Other("hypothesis checks do not cover stable terms".into()));
            }
            let one = Profile::constant(1.0);
            let mut v = OrderOneFamily::new(f.functionals.clone()).with_drift(f.drift.clone(), one.clone());
            for j in &f.jumps {
                v = v.with_jumps(j.intensity.clone(), one.clone(), j.shape.clone());
            }
            Ok(v)
        }
    }
}

fn kappa(
    family: &Family<f64>,
    grid: &Grid<f64>,
    samples: &[GridMeasure<f64>],
    alpha: f64,
) -> Result<(f64, Option<(usize, usize)>), CliError> {
    let pairs: Vec<(usize, usize)> = (0..samples.len())
        .flat_map(|a| (a + 1..samples.len()).map(move |b| (a, b)))
        .collect();
    if let Family::Levy(lf) = family {
        let measures: Vec<_> = pairs.iter().map(|&(a, b)| (samples[a].clone(), samples[b].clone())).collect();
        let est = estimate_levy_lipschitz(lf, &measures, 0.0, alpha)?;
        return Ok((est.kappa, est.argmax.map(|k| pairs[k])));
    }
    let mut best = (0.0, None);
    for &(a, b) in &pairs {
        let ma = family.moments(&samples[a])?;
        let mb = family.moments(&samples[b])?;
        let num = generator_distance(family, family, grid, 0.0, &ma, &mb, alpha)?;
        if num == 0.0 {
            continue;
        }
        let den = dual_norm(&samples[a], &samples[b], 2)?;
        if den > 0.0 && num / den > best.0 {
            best = (num / den, Some((a, b)));
        }
    }
    Ok(best)
}

/// Runs the boundedness, tightness and Lipschitz checks configured in `scenario.checks`.
pub fn run_checks(scenario: &Scenario, family: &Family<f64>, alpha: f64) -> Result<Option<CheckReport>, CliError> {
    let Some(spec) = &scenario.checks else {
        return Ok(None);
    };
    let grid = scenario.grid()?;
    let samples = scenario.check_samples(spec.samples)?;
    let view = order_one_view(family)?;
    let r: OrderOneReport<f64> = validate_order_one_conditions(&view, &grid, spec.eps, &samples, 0.0, alpha)?;
    let (kappa_hat, kappa_pair) = kappa(family, &grid, &samples, alpha)?;
    let flags = BTreeMap::from([
        ("bounded", r.bounded),
        ("tight", r.tight),
        ("lipschitz", r.lipschitz && kappa_hat.is_finite()),
    ]);
    Ok(Some(CheckReport {
        kind: match family {
            Family::Levy(_) => "levy",
            Family::OrderOne(_) => "order_one",
        },
        eps: spec.eps,
        kappa_hat,
        kappa_pair,
        boundedness: r.boundedness,
        drift_bound: r.drift_bound,
        gradient_bound: r.gradient_bound,
        tightness_cut: r.cut,
        tail: r.tail,
        gradient_tail: r.gradient_tail,
        small_ball_cut: r.small_ball_cut,
        small_ball: r.small_ball,
        lipschitz_nu: r.lipschitz_nu,
        lipschitz_drift: r.lipschitz_drift,
        flags,
    }))
}

