use std::path::{Path, PathBuf};

use nlmarkov::measures::dual_norm;
use nlmarkov::nonlinear::{solve_kinetic_on, stability_compare};
use nlmarkov::oracles::{particle_simulate, ParticleOptions};
use nlmarkov::sensitivity::{fd_validate, initial_alpha_derivative, linearized_propagate};
use nlmarkov::GridMeasure;
use serde::Serialize;

use crate::checks::{run_checks, CheckReport};
use crate::scenario::{InitialSpec, Output, Scenario};
use crate::CliError;

fn write(out: &Path, name: &str, text: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out)?;
    let path = out.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Runs the configured checks; a failing flag aborts with exit code 2 and leaves `checks.json` behind.
fn gate(scenario: &Scenario, family: &nlmarkov::generators::Family<f64>, alpha: f64, out: &Path) -> Result<Option<CheckReport>, CliError> {
    let report = run_checks(scenario, family, alpha)?;
    if let Some(r) = &report {
        write(out, "checks.json", &json(r))?;
        if !r.passed() {
            return Err(CliError::WellPosedness(format!(
                "hypothesis check failed ({}); checker report:\n{}",
                r.failed_flags().join(", "),
                json(r)
            )));
        }
    }
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct ParticleSummary {
    pub count: usize,
    pub seed: u64,
    /// `dual_norm(empirical, solver, 1)` at the horizon.
    pub dual_distance: f64,
    pub mean_jumps: f64,
    pub escaped: usize,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub scenario: String,
    pub alpha: f64,
    pub final_mean: f64,
    pub final_mass: f64,
    pub solver: serde_json::Value,
    pub checks: Option<CheckReport>,
    pub particles: Option<ParticleSummary>,
}

/// Solves the kinetic equation of the scenario and writes `solution.csv` and `report.json`.
pub fn simulate(scenario: &Scenario, out: &Path) -> Result<SimulateSummary, CliError> {
    let family = scenario.build_family()?;
    let alpha = scenario.alpha.unwrap_or(0.0);
    let checks = gate(scenario, &family, alpha, out)?;
    let mu = scenario.initial_measure()?;
    let partition = scenario.partition()?;
    let sol = solve_kinetic_on(&family, &mu, &partition, &scenario.options(alpha))?;
    if scenario.outputs.contains(&Output::Solution) {
        write(out, "solution.csv", &sol.to_csv())?;
    }
    let particles = match &scenario.particles {
        Some(p) => {
            let opts = ParticleOptions {
                particles: p.count,
                seed: scenario.seed,
                alpha,
                snapshots: scenario.outputs.contains(&Output::Particles),
            };
            let run = particle_simulate(&family, &mu, &partition, &opts)?;
            if opts.snapshots {
                write(out, "particles.csv", &run.snapshots_csv())?;
            }
            Some(ParticleSummary {
                count: p.count,
                seed: scenario.seed,
                dual_distance: dual_norm(run.curve.last(), sol.final_measure(), 1)?,
                mean_jumps: run.mean_jumps(),
                escaped: run.escaped,
            })
        }
        None => None,
    };
    let summary = SimulateSummary {
        scenario: scenario.name.clone(),
        alpha,
        final_mean: sol.final_measure().mean(),
        final_mass: sol.final_measure().mass(),
        solver: serde_json::to_value(sol.report()).expect("report serializes"),
        checks,
        particles,
    };
    if scenario.outputs.contains(&Output::Report) {
        write(out, "report.json", &json(&summary))?;
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SensitivitySummary {
    pub scenario: String,
    pub alpha: f64,
    pub alpha_independent: bool,
    pub mass_defect: f64,
    /// `(x, ξ_t)` at the horizon.
    pub final_first_moment: f64,
    pub fd: nlmarkov::sensitivity::FdReport,
}

/// Derivative of the solution in `α`: `sensitivity.csv` and `fd_validation.json`.
pub fn sensitivity(scenario: &Scenario, out: &Path) -> Result<SensitivitySummary, CliError> {
    let alpha = scenario
        .alpha
        .ok_or_else(|| CliError::Config("alpha: required by the sensitivity command".into()))?;
    let spec = scenario
        .sensitivity
        .as_ref()
        .ok_or_else(|| CliError::Config("sensitivity: section required by the sensitivity command".into()))?;
    let family = scenario.build_family()?;
    gate(scenario, &family, alpha, out)?;
    let grid = scenario.grid()?;
    let partition = scenario.partition()?;
    let base_dir = scenario.base_dir.clone();
    let initial = scenario.initial.clone();
    let slope = spec.mean_slope;
    let mu0 = move |a: f64| -> nlmarkov::Result<GridMeasure<f64>> {
        match &initial {
            InitialSpec::Gaussian { mean, std } => GridMeasure::gaussian(grid, mean + slope * (a - alpha), *std),
            other => other.build(&grid, &base_dir, "initial").map_err(|e| nlmarkov::Error::InvalidArgument(e.to_string())),
        }
    };
    let options = scenario.options(alpha);
    let base = solve_kinetic_on(&family, &mu0(alpha)?, &partition, &options)?;
    let run = linearized_propagate(&base, &initial_alpha_derivative(&mu0, alpha)?)?;
    write(out, "sensitivity.csv", &run.to_csv())?;
    let fd = fd_validate(&family, &mu0, alpha, &spec.h, &partition, &options, spec.samples)?;
    let x: Vec<f64> = (0..grid.len()).map(|i| grid.node(i)).collect();
    let summary = SensitivitySummary {
        scenario: scenario.name.clone(),
        alpha,
        alpha_independent: family.is_alpha_independent(),
        mass_defect: run.mass_defect(),
        final_first_moment: run.curve.last().weights().iter().zip(&x).map(|(w, x)| w * x).sum(),
        fd,
    };
    write(out, "fd_validation.json", &json(&summary))?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub scenario: String,
    pub report: nlmarkov::nonlinear::StabilityReport,
}

/// Stability comparison against `scenario.compare`; writes `compare.json`.
pub fn compare(scenario: &Scenario, out: &Path) -> Result<CompareSummary, CliError> {
    let spec = scenario
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Config("compare: section required by the compare command".into()))?;
    let alpha = scenario.alpha.unwrap_or(0.0);
    let fa = scenario.build_family()?;
    let fb = spec.family.build("compare.family")?;
    let mu = scenario.initial_measure()?;
    let eta = match &spec.initial {
        Some(i) => i.build(&scenario.grid()?, &scenario.base_dir, "compare.initial")?,
        None => mu.clone(),
    };
    let report = stability_compare(&fa, &fb, &mu, &eta, &scenario.partition()?, &scenario.options(alpha), spec.samples)?;
    let summary = CompareSummary {
        scenario: scenario.name.clone(),
        report,
    };
    write(out, "compare.json", &json(&summary))?;
    Ok(summary)
}
