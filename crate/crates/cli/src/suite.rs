use std::time::Instant;

use nlmarkov::generators::{dual_representation, Coefficient, Family, JumpMeasure, LevyFamily, OrderOneFamily, Profile, TimeProfile, Transform};
use nlmarkov::linear_prop::{compare_propagators, t_product, EngineKind, Freeze, Partition, Propagator, StepInput};
use nlmarkov::measures::{max_dual_norm, pair};
use nlmarkov::nonlinear::{
    lipschitz_probe, semigroup_check, solve_kinetic, solve_kinetic_on, stability_compare, InitialGuess, KineticOptions,
    KineticSolution,
};
use nlmarkov::oracles::{dense_apply, particle_simulate, GeneratorSource, OdeOptions, ParticleOptions};
use nlmarkov::perturbation::{Perturbation, PerturbedHandle};
use nlmarkov::scalar::sup_diff;
use nlmarkov::sensitivity::{fd_validate, initial_data_derivative, linearized_propagate};
use nlmarkov::{Curve, DenseMatrix, Grid, GridMeasure, TestFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::checks::run_checks;
use crate::scenario::shipped_scenario;

type Outcome = Result<(), Box<dyn std::error::Error>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Criteria 1-5 and 11.
    Fast,
    Full,
}

impl Suite {
    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::Fast => vec![1, 2, 3, 4, 5, 11],
            Suite::Full => (1..=11).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    /// One summary line: `PASS|FAIL  C<id> <title> (<seconds>)` plus the failing checks.
    pub fn line(&self) -> String {
        let mut s = format!(
            "{} C{:<2} {} ({:.1} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds
        );
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        for c in self.checks.iter().filter(|c| !c.passed) {
            s.push_str(&format!(" [{} = {:.6e}, want {}]", c.name, c.value, c.bound));
        }
        s
    }
}

/// Multiplier for criterion `id` read from `NLMARKOV_TOL_SCALE_C<id>`; values below 1 tighten.
pub fn tolerance_scale(id: u8) -> f64 {
    let key = format!("NLMARKOV_TOL_SCALE_C{id}");
    match std::env::var(&key) {
        Ok(v) => v.trim().parse().unwrap_or_else(|_| {
            log::warn!("{key}={v} is not a number; ignored");
            1.0
        }),
        Err(_) => 1.0,
    }
}

struct Ctx {
    scale: f64,
    checks: Vec<Check>,
}

impl Ctx {
    fn push(&mut self, name: &str, value: f64, bound: String, passed: bool) {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            bound,
            passed,
        });
    }

    fn at_most(&mut self, name: &str, value: f64, tol: f64) {
        let b = tol * self.scale;
        self.push(name, value, format!("<= {b:.3e}"), value <= b);
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        let b = bound / self.scale;
        self.push(name, value, format!(">= {b:.3e}"), value >= b);
    }

    fn within(&mut self, name: &str, value: f64, target: f64, tol: f64) {
        let b = tol * self.scale;
        self.push(name, value, format!("{target:.6} ± {b:.1e}"), (value - target).abs() <= b);
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.push(name, if ok { 1.0 } else { 0.0 }, "true".into(), ok);
    }
}

const TITLES: [&str; 11] = [
    "duality identity",
    "chain rule",
    "propagator convergence",
    "Dyson/mild equivalence",
    "T-product convergence",
    "nonlinear well-posedness",
    "semigroup and Lipschitz continuity",
    "stability",
    "sensitivity",
    "particle cross-check",
    "hypothesis checkers",
];

const BUDGETS: [f64; 11] = [5.0, 5.0, 10.0, 5.0, 30.0, 60.0, 60.0, 90.0, 120.0, 180.0, 10.0];

pub fn run_criterion(id: u8) -> CriterionResult {
    assert!((1..=11).contains(&id), "criteria are numbered 1 to 11");
    let k = id as usize - 1;
    let mut ctx = Ctx {
        scale: tolerance_scale(id),
        checks: Vec::new(),
    };
    let start = Instant::now();
    let outcome = match id {
        1 => c1(&mut ctx),
        2 => c2(&mut ctx),
        3 => c3(&mut ctx),
        4 => c4(&mut ctx),
        5 => c5(&mut ctx),
        6 => c6(&mut ctx),
        7 => c7(&mut ctx),
        8 => c8(&mut ctx),
        9 => c9(&mut ctx),
        10 => c10(&mut ctx),
        _ => c11(&mut ctx),
    };
    let seconds = start.elapsed().as_secs_f64();
    ctx.push("runtime seconds", seconds, format!("<= {}", BUDGETS[k]), seconds <= BUDGETS[k]);
    CriterionResult {
        id,
        title: TITLES[k],
        checks: ctx.checks,
        error: outcome.err().map(|e| e.to_string()),
        seconds,
        budget_seconds: BUDGETS[k],
    }
}

/// Runs the criteria of `suite` in order, or only `only` when given.
pub fn run_suite(suite: Suite, only: &[u8]) -> Vec<CriterionResult> {
    suite
        .criteria()
        .into_iter()
        .filter(|id| only.is_empty() || only.contains(id))
        .map(|id| {
            let r = run_criterion(id);
            log::info!("{}", r.line());
            r
        })
        .collect()
}

fn random_probability(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> GridMeasure<f64> {
    let w: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    GridMeasure::new(*grid, w.into_iter().map(|x| x / s).collect()).expect("positive weights")
}

fn random_function(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> TestFunction<f64> {
    let v: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    TestFunction::new(*grid, v, 0).expect("grid-sized values")
}

fn random_order_one(rng: &mut ChaCha8Rng) -> OrderOneFamily<f64> {
    let sin = |rng: &mut ChaCha8Rng| Profile::Sin {
        amplitude: 1.0,
        frequency: rng.random_range(0.3..1.5),
        phase: rng.random_range(0.0..3.0),
    };
    let phi = sin(rng);
    let drift_profile = sin(rng);
    let jumps: Vec<(f64, f64)> = (0..3)
        .map(|_| {
            let y: f64 = rng.random_range(0.1..1.2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            (y, rng.random_range(0.1..1.0))
        })
        .collect();
    OrderOneFamily::new(vec![phi])
        .with_drift(
            Coefficient::constant(rng.random_range(-1.0..1.0))
                .with_interaction(0, rng.random_range(-0.5..0.5), Transform::Tanh)
                .with_time(TimeProfile::Sin {
                    offset: 1.0,
                    amplitude: 0.5,
                    frequency: rng.random_range(0.5..3.0),
                    phase: 0.0,
                }),
            drift_profile,
        )
        .with_jumps(
            Coefficient::constant(1.0).with_interaction(0, rng.random_range(0.0..0.5), Transform::Square),
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: rng.random_range(0.5..2.0),
            },
            JumpMeasure::points(jumps).expect("positive rates"),
        )
}

fn c1(ctx: &mut Ctx) -> Outcome {
    let grid = Grid::new(-3.0, 3.0, 32)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = Partition::uniform(0.0, 1.0, 8)?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let fam: Family<f64> = random_order_one(&mut rng).into();
        let curve = Curve::constant(p.nodes().to_vec(), &random_probability(&grid, &mut rng))?;
        let u = Propagator::build_matrix(&fam, &curve, &p, 0.0, Freeze::LeftEndpoint)?;
        for _ in 0..10 {
            let a = rng.random_range(0..p.len());
            let b = rng.random_range(a..p.len());
            let (t, s) = (p.nodes()[a], p.nodes()[b]);
            let f = random_function(&grid, &mut rng);
            let mu = random_probability(&grid, &mut rng);
            let lhs = pair(&u.apply(&f, t, s)?, &mu)?;
            let rhs = pair(&f, &u.dual_apply(&mu, s, t)?)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    ctx.at_most("duality defect over 100 triples", worst, 1e-10);
    Ok(())
}

fn chain_defect(u: &Propagator<f64>, f: &TestFunction<f64>) -> nlmarkov::Result<f64> {
    let nodes = u.partition().nodes();
    let mut worst: f64 = 0.0;
    for a in 0..nodes.len() {
        for b in a..nodes.len() {
            let direct = u.apply(f, nodes[a], nodes[b])?;
            for c in a..=b {
                let inner = u.apply(f, nodes[c], nodes[b])?;
                let outer = u.apply(&inner, nodes[a], nodes[c])?;
                worst = worst.max(sup_diff(outer.values(), direct.values()));
            }
        }
    }
    Ok(worst)
}

fn levy_sample() -> nlmarkov::Result<LevyFamily<f64>> {
    Ok(LevyFamily::new(vec![])
        .with_diffusion(Coefficient::constant(0.4))
        .with_drift(Coefficient::constant(0.5).with_time(TimeProfile::Sin {
            offset: 0.0,
            amplitude: 1.0,
            frequency: 2.0,
            phase: 0.5,
        }))
        .with_jumps(Coefficient::constant(0.7), JumpMeasure::points(vec![(-0.8, 1.0), (1.3, 0.4)])?))
}

fn spectral(family: &LevyFamily<f64>, grid: &Grid<f64>, p: &Partition<f64>) -> nlmarkov::Result<Propagator<f64>> {
    let fam = Family::Levy(family.clone());
    let inputs = StepInput::unfrozen(&fam, p, Freeze::LeftEndpoint)?;
    Propagator::spectral_from_inputs(family, grid, p, inputs, 0.0)
}

fn matrix(family: &Family<f64>, grid: &Grid<f64>, p: &Partition<f64>, freeze: Freeze) -> nlmarkov::Result<Propagator<f64>> {
    let inputs = StepInput::unfrozen(family, p, freeze)?;
    Propagator::matrix_from_inputs(family, grid, p, inputs, 0.0)
}

fn c2(ctx: &mut Ctx) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = Grid::new(-3.0, 3.0, 32)?;
    let p = Partition::uniform(0.0, 1.0, 15)?;
    let fam: Family<f64> = random_order_one(&mut rng).into();
    let curve = Curve::constant(p.nodes().to_vec(), &random_probability(&grid, &mut rng))?;
    let u = Propagator::build_matrix(&fam, &curve, &p, 0.0, Freeze::LeftEndpoint)?;
    let f = random_function(&grid, &mut rng);
    ctx.at_most("matrix engine chain defect", chain_defect(&u, &f)?, 1e-10);

    let grid = Grid::new(-10.0, 10.0, 256)?;
    let u = spectral(&levy_sample()?, &grid, &p)?;
    let f = TestFunction::from_fn(grid, 2, |x: f64| (-x * x / 2.0).exp() * (1.5 * x).sin())?;
    ctx.at_most("spectral engine chain defect", chain_defect(&u, &f)?, 1e-8);
    Ok(())
}

fn c3(ctx: &mut Ctx) -> Outcome {
    let grid = Grid::new(-3.0, 3.0, 48)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = Partition::uniform(0.0, 1.0, 4)?;
    let base = OrderOneFamily::new(vec![])
        .with_drift(Coefficient::constant(0.5), Profile::constant(1.0))
        .with_jumps(Coefficient::constant(1.0), Profile::constant(1.0), JumpMeasure::dirac(0.5, 1.0)?);
    let handle = |eps: f64| -> nlmarkov::Result<Propagator<f64>> {
        let fam: Family<f64> = base
            .clone()
            .with_jumps(
                Coefficient::constant(eps),
                Profile::Gaussian {
                    amplitude: 1.0,
                    center: 0.0,
                    width: 1.0,
                },
                JumpMeasure::dirac(-0.25, 1.0)?,
            )
            .into();
        matrix(&fam, &grid, &p, Freeze::LeftEndpoint)
    };
    let a = handle(0.0)?;
    let f = vec![TestFunction::from_fn(grid, 2, |x: f64| x.sin())?, random_function(&grid, &mut rng)];
    let mu = vec![GridMeasure::gaussian(grid, 0.0, 0.6)?];
    let r2 = compare_propagators(&a, &handle(1e-2)?, &f, &mu)?;
    let r3 = compare_propagators(&a, &handle(1e-3)?, &f, &mu)?;
    ctx.within("function distance ratio / 10", r2.function_distance / r3.function_distance / 10.0, 1.0, 0.25);
    ctx.within("measure distance ratio / 10", r2.measure_distance / r3.measure_distance / 10.0, 1.0, 0.25);
    Ok(())
}

fn constant_handle(grid: &Grid<f64>, p: &Partition<f64>, a: &DenseMatrix<f64>) -> nlmarkov::Result<Propagator<f64>> {
    let fam = Family::OrderOne(OrderOneFamily::new(vec![]));
    let inputs = StepInput::unfrozen(&fam, p, Freeze::LeftEndpoint)?;
    let factors = (0..p.steps()).map(|j| a.scaled(p.dt(j)).expm()).collect::<nlmarkov::Result<Vec<_>>>()?;
    Propagator::from_step_matrices(EngineKind::DenseOracle, &fam, grid, p, inputs, 0.0, factors)
}

/// Largest Picard ratio of the linearized dual flow frozen at the initial measure of a shipped scenario.
fn shipped_picard_ratio(name: &str) -> Result<f64, Box<dyn std::error::Error>> {
    let s = shipped_scenario(name)?;
    let fam = s.build_family()?;
    let mu = s.initial_measure()?;
    let grid = s.grid()?;
    let alpha = s.alpha.unwrap_or(0.0);
    let p = Partition::uniform(0.0, s.horizon, 20)?;
    let curve = Curve::constant(p.nodes().to_vec(), &mu)?;
    let u = match &fam {
        Family::Levy(lf) => Propagator::build_spectral(lf, &curve, &p, alpha, Freeze::LeftEndpoint)?,
        Family::OrderOne(_) => Propagator::build_matrix(&fam, &curve, &p, alpha, Freeze::LeftEndpoint)?,
    };
    let ops = p
        .nodes()
        .iter()
        .map(|&t| dual_representation(&fam, &mu, t, alpha))
        .collect::<nlmarkov::Result<Vec<_>>>()?;
    let h = PerturbedHandle::new(&u, Perturbation::LowRank(ops))?;
    let xi = GridMeasure::gaussian_dipole(grid, mu.mean(), 0.5)?;
    let (_, report) = h.dual(&xi, s.horizon, 0.0)?;
    Ok(report.max_ratio().unwrap_or(0.0))
}

fn c4(ctx: &mut Ctx) -> Outcome {
    let grid = Grid::new(0.0, 1.0, 8)?;
    let p = Partition::uniform(0.0, 1.0, 1000)?;
    let mut a = DenseMatrix::zeros(8, 8);
    a.add_identity(0.5);
    let u = constant_handle(&grid, &p, &a)?;
    let mut f = DenseMatrix::zeros(8, 8);
    f.add_identity(0.25);
    let h = PerturbedHandle::new(&u, Perturbation::constant(f, p.len()))?;
    let (got, report) = h.propagate(&TestFunction::constant(grid, 1.0), 0.0, 1.0)?;
    let worst = got.values().iter().map(|v| (v - 2.11700).abs()).fold(0.0, f64::max);
    ctx.at_most("|sandbox − 2.11700| (e^0.75 = 2.1170000166)", worst, 1e-6);
    ctx.at_most("sandbox Picard ratio", report.max_ratio().unwrap_or(0.0), 1.0 - 1e-12);

    let p = Partition::uniform(0.0, 1.0, 4000)?;
    let a = DenseMatrix::from_fn(8, 8, |i, j| match (j + 8 - i) % 8 {
        0 => -1.5,
        1 => 1.0,
        7 => 0.5,
        _ => 0.0,
    });
    let mut f = a.matmul(&a).scaled(0.1);
    f.axpy(0.3, &a);
    f.add_identity(0.2);
    let u = constant_handle(&grid, &p, &a)?;
    let h = PerturbedHandle::new(&u, Perturbation::constant(f.clone(), p.len()))?;
    let g = TestFunction::from_fn(grid, 0, |x| (3.0 * x).sin() + x)?;
    let (got, _) = h.propagate(&g, 0.0, 1.0)?;
    let mut sum = a.clone();
    sum.axpy(1.0, &f);
    let want = sum.expm()?.matvec(g.values());
    ctx.at_most("commuting case vs exp((A+F)t)", sup_diff(got.values(), &want), 1e-8);

    for name in ["meanfield_drift", "unit_moment_drift"] {
        let r = shipped_picard_ratio(name)?;
        ctx.at_most(&format!("Picard ratio, {name}"), r, 1.0 - 1e-12);
    }
    Ok(())
}

fn c5(ctx: &mut Ctx) -> Outcome {
    let grid = Grid::new(-10.0, 10.0, 256)?;
    let f = TestFunction::from_fn(grid, 2, |x: f64| (-x * x / 2.0).exp())?;
    let mut fam = LevyFamily::new(vec![]).with_diffusion(Coefficient::constant(1.0));
    fam.diffusion = fam.diffusion.with_time(TimeProfile::Linear {
        intercept: 0.0,
        slope: 2.0,
    });
    let res = t_product(|p| spectral(&fam, &grid, p), &Partition::uniform(0.0, 1.0, 4)?, &f, 1e-4)?;
    let residuals: Vec<f64> = res.rows.iter().filter_map(|r| r.residual).collect();
    ctx.holds("residuals decrease after two refinements", residuals.len() >= 2 && residuals.windows(2).all(|w| w[1] < w[0]));
    let order = res.observed_order().ok_or("no observed order")?;
    ctx.within("observed order", order, 1.0, 0.2);

    let grid = Grid::new(-3.0, 3.0, 64)?;
    let fam: Family<f64> = OrderOneFamily::new(vec![])
        .with_drift(
            Coefficient::constant(1.0).with_time(TimeProfile::Sin {
                offset: 0.0,
                amplitude: 1.0,
                frequency: 1.0,
                phase: 0.0,
            }),
            Profile::constant(1.0),
        )
        .with_jumps(Coefficient::constant(0.5), Profile::constant(1.0), JumpMeasure::dirac(-0.5, 1.0)?)
        .into();
    let f = TestFunction::from_fn(grid, 2, |x: f64| (-x * x).exp())?;
    let res = t_product(|p| matrix(&fam, &grid, p, Freeze::Midpoint), &Partition::uniform(0.0, 1.0, 4)?, &f, 2e-6)?;
    let gen = |t: f64| Ok(fam.generator(&grid, t, &[], 0.0)?.matrix);
    let oracle = dense_apply(&GeneratorSource::Continuous(&gen), &f, &Partition::uniform(0.0, 1.0, 1)?, &OdeOptions::default())?;
    ctx.at_most("dense-oracle agreement (n=64)", sup_diff(oracle.values(), res.value.values()), 1e-5);
    Ok(())
}

fn mean_field(g: f64, shift: f64) -> Family<f64> {
    Family::Levy(
        LevyFamily::new(vec![Profile::identity()])
            .with_diffusion(Coefficient::constant(g))
            .with_drift(Coefficient::linear(shift, 0, -1.0)),
    )
}

fn meanfield_solution() -> Result<(KineticSolution<f64>, crate::Scenario), Box<dyn std::error::Error>> {
    let s = shipped_scenario("meanfield_drift")?;
    let sol = solve_kinetic_on(&s.build_family()?, &s.initial_measure()?, &s.partition()?, &s.options(0.0))?;
    Ok((sol, s))
}

fn c6(ctx: &mut Ctx) -> Outcome {
    let (sol, _) = meanfield_solution()?;
    let m = sol.final_measure().mean();
    ctx.within("mean at t=1 vs e^-1", m, (-1.0f64).exp(), 5e-4);
    ctx.within("mean at t=1 vs 0.367879", m, 0.367879, 5e-4);
    ctx.at_most("mass drift", sol.mass_defect, 1e-8);
    ctx.at_least("min weight", sol.min_weight, -1e-6);
    let worst = sol
        .windows
        .iter()
        .filter_map(|w| w.ratio().into_iter().chain(w.total_ratio()).reduce(f64::max))
        .fold(0.0, f64::max);
    ctx.at_most("max window contraction ratio", worst, 1.0 - 1e-12);

    let grid = Grid::new(-5.0, 5.0, 256)?;
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5)?;
    let other = GridMeasure::gaussian(grid, -0.5, 0.8)?;
    let fam = mean_field(0.05, 0.0);
    let p = Partition::with_mesh(0.0, 0.5, 5e-3)?;
    let tol = 1e-9;
    let a = solve_kinetic_on(&fam, &mu, &p, &KineticOptions { tol, ..Default::default() })?;
    let opts = KineticOptions {
        tol,
        guess: InitialGuess::Interpolate(other),
        ..Default::default()
    };
    let b = solve_kinetic_on(&fam, &mu, &p, &opts)?;
    let (d, _) = max_dual_norm(a.curve.values(), b.curve.values(), 2)?;
    ctx.at_most("distinct initial guesses / tol", d / tol, 2.0);
    Ok(())
}

fn c7(ctx: &mut Ctx) -> Outcome {
    let (sol, s) = meanfield_solution()?;
    let rep = semigroup_check(&sol, &[(0.5, 0.5)])?;
    ctx.at_most("semigroup defect at (0.5, 0.5) / tol", rep.max_defect() / sol.options.tol, 5.0);

    let fam = s.build_family()?;
    let mu = s.initial_measure()?;
    let p = Partition::with_mesh(0.0, 1.0, 1e-2)?;
    let probe = lipschitz_probe(&fam, &mu, &mu, &p, &KineticOptions::default(), 10)?;
    let c: Vec<f64> = probe.rows.iter().filter(|r| r.time >= 0.1 - 1e-12).map(|r| r.continuity).collect();
    let hi = c.iter().copied().fold(0.0, f64::max);
    let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
    ctx.holds("continuity constants finite and positive", !c.is_empty() && lo > 0.0 && hi.is_finite());
    ctx.at_most("spread max c / min c over t in [0.1, 1]", hi / lo, 2.0);
    Ok(())
}

fn c8(ctx: &mut Ctx) -> Outcome {
    let grid = Grid::new(-5.0, 5.0, 256)?;
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5)?;
    let p = Partition::with_mesh(0.0, 1.0, 1e-2)?;
    let opts = KineticOptions::default();
    let base = mean_field(0.02, 0.0);
    let mut d = Vec::new();
    for e in [0.01, 0.02, 0.04] {
        d.push(stability_compare(&base, &mean_field(0.02, e), &mu, &mu, &p, &opts, 10)?.sup_distance);
    }
    for (k, w) in d.windows(2).enumerate() {
        ctx.within(&format!("distance ratio step {}", k + 1), w[1] / w[0] / 2.0, 1.0, 0.25);
    }
    Ok(())
}

fn first_moment(xi: &GridMeasure<f64>) -> nlmarkov::Result<f64> {
    pair(&TestFunction::from_fn(*xi.grid(), 0, |x| x)?, xi)
}

fn c9(ctx: &mut Ctx) -> Outcome {
    let alpha_mean_field = Family::Levy(
        LevyFamily::new(vec![Profile::identity()])
            .with_diffusion(Coefficient::constant(0.02))
            .with_drift(Coefficient::linear(0.0, 0, -1.0).scaling_interaction_by_alpha()),
    );
    let grid = Grid::new(-5.0, 5.0, 512)?;
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5)?;
    let opts = KineticOptions {
        alpha: 1.0,
        ..Default::default()
    };
    let base = solve_kinetic(&alpha_mean_field, &mu, 1.0, 1e-3, &opts)?;
    let run = linearized_propagate(&base, &GridMeasure::zeros(grid))?;
    ctx.within("(x, ξ_1) vs −e^-1", first_moment(run.curve.last())?, -(-1.0f64).exp(), 1e-3);
    ctx.at_most("zero-mass invariant", run.mass_defect(), 1e-8);

    let a = GridMeasure::gaussian_dipole(grid, 1.0, 0.5)?;
    let b = GridMeasure::gaussian(grid, 1.0, 0.3)?.sub(&GridMeasure::gaussian(grid, -0.2, 0.5)?)?;
    let ra = initial_data_derivative(&base, &a)?;
    let rb = initial_data_derivative(&base, &b)?;
    let rab = initial_data_derivative(&base, &a.combine(2.0, &b, -3.0)?)?;
    let mut gap: f64 = 0.0;
    for j in (0..base.partition.len()).step_by(100) {
        let sum = ra.curve.values()[j].combine(2.0, &rb.curve.values()[j], -3.0)?;
        gap = gap.max(sup_diff(sum.weights(), rab.curve.values()[j].weights()));
    }
    ctx.at_most("superposition defect", gap, 1e-10);

    let s = shipped_scenario("meanfield_sensitivity")?;
    let spec = s.sensitivity.clone().ok_or("scenario lacks a sensitivity section")?;
    let alpha = s.alpha.ok_or("scenario lacks alpha")?;
    let fam = s.build_family()?;
    let sgrid = s.grid()?;
    let (m0, std) = match s.initial {
        crate::scenario::InitialSpec::Gaussian { mean, std } => (mean, std),
        _ => return Err("sensitivity scenario needs a Gaussian start".into()),
    };
    let mu0 = |a: f64| GridMeasure::gaussian(sgrid, m0 + spec.mean_slope * (a - alpha), std);
    let rep = fd_validate(&fam, &mu0, alpha, &[1e-2, 1e-3], &s.partition()?, &s.options(alpha), spec.samples)?;
    ctx.at_least("FD defect shrink h=1e-2 → 1e-3", rep.rows[0].defect / rep.rows[1].defect, 50.0);
    Ok(())
}

fn c10(ctx: &mut Ctx) -> Outcome {
    let grid = Grid::new(-5.0, 5.0, 512)?;
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5)?;
    let fam = mean_field(0.02, 0.0);
    let sol = solve_kinetic(&fam, &mu, 1.0, 1e-3, &KineticOptions::default())?;
    let p = sol.partition.clone();
    let sizes = [1000usize, 4000, 16000];
    let seeds = 4u64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &sizes {
        let mut sq = 0.0;
        for s in 0..seeds {
            let opts = ParticleOptions {
                particles: n,
                seed: 100 + s,
                ..Default::default()
            };
            let run = particle_simulate(&fam, &mu, &p, &opts)?;
            sq += nlmarkov::measures::dual_norm(run.curve.last(), sol.final_measure(), 1)?.powi(2);
        }
        xs.push((n as f64).ln());
        ys.push((sq / seeds as f64).sqrt().ln());
    }
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    ctx.within("log-log slope of dual_norm(·,·,1)", slope, -0.5, 0.1);

    let grid = Grid::new(-5.0, 15.0, 256)?;
    let poisson = Family::Levy(LevyFamily::new(vec![]).with_jumps(Coefficient::constant(0.5), JumpMeasure::dirac(1.5, 1.0)?));
    let start = GridMeasure::gaussian(grid, 0.0, 0.5)?;
    let p = Partition::with_mesh(0.0, 2.0, 0.01)?;
    let n = 4000;
    let opts = ParticleOptions {
        particles: n,
        seed: 7,
        ..Default::default()
    };
    let run = particle_simulate(&poisson, &start, &p, &opts)?;
    // λt = 1 with variance 1 per particle
    let sigma = (1.0 / n as f64).sqrt();
    ctx.at_most("|mean jump count − λt| / σ", (run.mean_jumps() - 1.0).abs() / sigma, 3.0);
    Ok(())
}

fn c11(ctx: &mut Ctx) -> Outcome {
    let s = shipped_scenario("unit_moment_drift")?;
    let r = run_checks(&s, &s.build_family()?, 0.0)?.ok_or("passing scenario has no checks section")?;
    ctx.holds("passing family: all flags pass", r.passed());
    ctx.holds("passing family: κ̂ > 0", r.kappa_hat > 0.0);
    ctx.at_most("passing family: κ̂ − 1", r.kappa_hat - 1.0, 1e-6);

    let s = shipped_scenario("heavy_tail")?;
    let r = run_checks(&s, &s.build_family()?, 0.0)?.ok_or("failing scenario has no checks section")?;
    ctx.holds("heavy tail: exactly the tightness flag fails", r.failed_flags() == ["tight"]);
    Ok(())
}
