mod common;

use nlmarkov::generators::{Coefficient, Family, JumpMeasure, LevyFamily, OrderOneFamily, Profile};
use nlmarkov::linear_prop::{Freeze, Partition, Propagator, StepInput};
use nlmarkov::measures::{dual_norm, max_dual_norm, pair};
use nlmarkov::nonlinear::{
    lipschitz_probe, semigroup_check, solve_kinetic, solve_kinetic_on, stability_compare, EngineChoice,
    InitialGuess, KineticOptions,
};
use nlmarkov::oracles::{dense_evolve, dopri5, GeneratorSource, OdeOptions};
use nlmarkov::{Error, Grid, GridMeasure, TestFunction};

fn mean_field(g: f64, shift: f64) -> Family<f64> {
    Family::Levy(
        LevyFamily::new(vec![Profile::identity()])
            .with_diffusion(Coefficient::constant(g))
            .with_drift(Coefficient::linear(shift, 0, -1.0)),
    )
}

fn mean_field_start() -> GridMeasure<f64> {
    GridMeasure::gaussian(Grid::new(-5.0, 5.0, 512).unwrap(), 1.0, 0.5).unwrap()
}

#[test]
fn measure_independent_family_needs_one_sweep() {
    let lf = LevyFamily::new(vec![])
        .with_diffusion(Coefficient::constant(0.3))
        .with_drift(Coefficient::constant(0.2))
        .with_jumps(Coefficient::constant(0.7), JumpMeasure::points(vec![(0.3, 1.0), (-0.5, 0.5)]).unwrap());
    let fam = Family::Levy(lf.clone());
    let grid = Grid::new(-8.0, 8.0, 256).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.0, 0.7).unwrap();
    let sol = solve_kinetic(&fam, &mu, 1.0, 0.01, &KineticOptions::default()).unwrap();
    assert_eq!(sol.windows.len(), 1);
    assert!(sol.windows[0].sweeps() <= 2);
    let p = Partition::with_mesh(0.0, 1.0, 0.01).unwrap();
    let inputs = StepInput::unfrozen(&fam, &p, Freeze::LeftEndpoint).unwrap();
    let lin = Propagator::spectral_from_inputs(&lf, &grid, &p, inputs, 0.0).unwrap();
    let want = lin.dual_apply(&mu, 1.0, 0.0).unwrap();
    let d = dual_norm(sol.final_measure(), &want, 2).unwrap();
    assert!(d < 1e-8, "{d}");
}

#[test]
fn mean_field_mean_decays_exponentially() {
    let mu = mean_field_start();
    let sol = solve_kinetic(&mean_field(0.02, 0.0), &mu, 1.0, 1e-3, &KineticOptions::default()).unwrap();
    let m = sol.final_measure().mean();
    assert!((m - (-1.0f64).exp()).abs() < 5e-4, "mean {m}");
    assert!((m - 0.367879).abs() < 5e-4);
    for (t, mu_t) in sol.curve.times().iter().zip(sol.curve.values()).step_by(100) {
        assert!((mu_t.mean() - (-t).exp()).abs() < 5e-4);
    }
    assert!(sol.mass_defect < 1e-8);
    assert!(sol.min_weight > -1e-6);
    assert!(sol.max_ratio().unwrap_or(0.0) < 1.0);
    for w in &sol.windows {
        if let Some(r) = w.total_ratio() {
            assert!(r < 1.0);
        }
    }
    assert!(sol.continuity.is_finite() && sol.continuity > 0.0);
    let csv = sol.to_csv();
    assert!(csv.starts_with("time,node,weight\n"));
    assert_eq!(csv.lines().count(), 1 + 1001 * 512);
}

#[test]
fn distinct_initial_guesses_agree() {
    let grid = Grid::new(-5.0, 5.0, 256).unwrap();
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5).unwrap();
    let other = GridMeasure::gaussian(grid, -0.5, 0.8).unwrap();
    let fam = mean_field(0.05, 0.0);
    let p = Partition::with_mesh(0.0, 0.5, 5e-3).unwrap();
    let tol = 1e-9;
    let a = solve_kinetic_on(&fam, &mu, &p, &KineticOptions { tol, ..Default::default() }).unwrap();
    let opts = KineticOptions {
        tol,
        guess: InitialGuess::Interpolate(other),
        ..Default::default()
    };
    let b = solve_kinetic_on(&fam, &mu, &p, &opts).unwrap();
    let (d, _) = max_dual_norm(a.curve.values(), b.curve.values(), 2).unwrap();
    assert!(d <= 2.0 * tol, "{d}");
}

#[test]
fn compound_poisson_activity_matches_moment_ode() {
    // ν(μ) = λ·(e^x, μ)·δ_y with |y| > 1 (no compensator) closes on c = (e^x, μ): c' = λ(e^y − 1)c²
    let grid = Grid::new(-10.0, 6.0, 256).unwrap();
    let y: f64 = -24.0 * grid.spacing();
    let lambda = 0.5;
    let phi = Profile::Exp {
        amplitude: 1.0,
        rate: 1.0,
    };
    let fam = Family::Levy(
        LevyFamily::new(vec![phi.clone()]).with_jumps(Coefficient::linear(0.0, 0, lambda), JumpMeasure::dirac(y, 1.0).unwrap()),
    );
    let mu = GridMeasure::gaussian(grid, 1.0, 0.4).unwrap();
    let opts = KineticOptions {
        freeze: Freeze::Midpoint,
        ..Default::default()
    };
    let sol = solve_kinetic(&fam, &mu, 1.0, 2e-3, &opts).unwrap();
    let f = TestFunction::from_fn(grid, 0, |x: f64| x.exp()).unwrap();
    let c0 = pair(&f, &mu).unwrap();
    let k = lambda * (y.exp() - 1.0);
    for (t, mu_t) in sol.curve.times().iter().zip(sol.curve.values()).step_by(50) {
        let exact = dopri5(&|_, c: &[f64]| Ok(vec![k * c[0] * c[0]]), 0.0, *t, &[c0], &OdeOptions::default())
            .map(|v| v[0])
            .unwrap_or(c0);
        let activity = lambda * pair(&f, mu_t).unwrap();
        assert!((activity - lambda * exact).abs() < 1e-4, "t={t}: {activity} vs {}", lambda * exact);
    }
}

#[test]
fn one_step_windows_that_expand_fail() {
    let fam = Family::Levy(
        LevyFamily::new(vec![Profile::identity()])
            .with_diffusion(Coefficient::constant(0.1))
            .with_drift(Coefficient::linear(0.0, 0, -100.0)),
    );
    let grid = Grid::new(-5.0, 5.0, 128).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.5, 0.5).unwrap();
    let opts = KineticOptions {
        freeze: Freeze::Midpoint,
        ..Default::default()
    };
    assert!(matches!(solve_kinetic(&fam, &mu, 0.2, 0.1, &opts), Err(Error::WellPosedness(_))));
}

fn smooth_order_one() -> Family<f64> {
    Family::OrderOne(
        OrderOneFamily::new(vec![Profile::Sin {
            amplitude: 1.0,
            frequency: 0.7,
            phase: 0.3,
        }])
        .with_drift(
            Coefficient::linear(0.4, 0, 0.8),
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: 1.5,
            },
        )
        .with_jumps(
            Coefficient::linear(0.6, 0, 0.3),
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: 0.8,
            },
            JumpMeasure::points(vec![(0.5, 1.0), (-0.8, 0.6)]).unwrap(),
        ),
    )
}

#[test]
fn order_one_solutions_converge_in_the_mesh() {
    let grid = Grid::new(-6.0, 6.0, 64).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.3, 0.8).unwrap();
    let fam = smooth_order_one();
    let opts = KineticOptions::default();
    let runs: Vec<_> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&d| solve_kinetic(&fam, &mu, 0.4, d, &opts).unwrap())
        .collect();
    for r in &runs {
        assert!(r.mass_defect < 1e-8);
        assert!(r.min_weight > -1e-10);
        assert_eq!(r.engine, nlmarkov::linear_prop::EngineKind::Matrix);
    }
    let d1 = dual_norm(runs[0].final_measure(), runs[1].final_measure(), 2).unwrap();
    let d2 = dual_norm(runs[1].final_measure(), runs[2].final_measure(), 2).unwrap();
    let order = (d1 / d2).log2();
    assert!(order >= 0.8, "observed order {order}");

    // weak residual at the first step shrinks with the mesh
    let g = TestFunction::from_fn(grid, 2, |x| (-x * x / 4.0).exp()).unwrap();
    let residual = |sol: &nlmarkov::nonlinear::KineticSolution<f64>| {
        let mut worst = 0.0f64;
        for j in 0..sol.partition.steps() {
            let (a, b) = (&sol.curve.values()[j], &sol.curve.values()[j + 1]);
            let dt = sol.partition.dt(j);
            let m = fam.moments(a).unwrap();
            let ag = fam.generator(&grid, sol.partition.nodes()[j], &m, 0.0).unwrap().matrix.matvec(g.values());
            let lhs = (pair(&g, b).unwrap() - pair(&g, a).unwrap()) / dt;
            let rhs: f64 = ag.iter().zip(a.weights()).map(|(x, y)| x * y).sum();
            worst = worst.max((lhs - rhs).abs());
        }
        worst
    };
    let r0 = residual(&runs[0]);
    let r2 = residual(&runs[2]);
    assert!(r2 < r0 / 3.0, "{r0} -> {r2}");
}

#[test]
fn semigroup_defects() {
    let mu = mean_field_start();
    let sol = solve_kinetic(&mean_field(0.02, 0.0), &mu, 1.0, 1e-3, &KineticOptions::default()).unwrap();
    let rep = semigroup_check(&sol, &[(0.0, 0.5), (0.5, 0.5), (0.25, 0.5)]).unwrap();
    assert_eq!(rep.rows[0].defect, 0.0);
    assert!(rep.max_defect() <= 5.0 * sol.options.tol, "{:?}", rep.rows);

    let heat = Family::Levy(LevyFamily::new(vec![]).with_diffusion(Coefficient::constant(0.5)));
    let grid = Grid::new(-8.0, 8.0, 128).unwrap();
    let lin = solve_kinetic(&heat, &GridMeasure::gaussian(grid, 0.0, 1.0).unwrap(), 1.0, 0.05, &KineticOptions::default()).unwrap();
    assert!(semigroup_check(&lin, &[(0.3, 0.4)]).unwrap().max_defect() < 1e-12);
}

#[test]
fn heat_flow_is_a_dual_norm_contraction() {
    let grid = Grid::new(-6.0, 6.0, 64).unwrap();
    let heat = Family::Levy(LevyFamily::new(vec![]).with_diffusion(Coefficient::constant(0.4)));
    let mu = GridMeasure::gaussian(grid, 0.5, 0.6).unwrap();
    let eta = GridMeasure::gaussian(grid, -0.3, 0.9).unwrap();
    let p = Partition::uniform(0.0, 1.0, 50).unwrap();
    let opts = KineticOptions {
        engine: EngineChoice::Matrix,
        ..Default::default()
    };
    let rep = lipschitz_probe(&heat, &mu, &eta, &p, &opts, 10).unwrap();
    assert!(rep.max_ratio().unwrap() <= 1.0 + 1e-6);
    let m = heat.generator(&grid, 0.0, &[], 0.0).unwrap().matrix;
    let src = GeneratorSource::Piecewise(std::slice::from_ref(&m));
    let one = Partition::uniform(0.0, 1.0, 1).unwrap();
    let a = dense_evolve(&src, &mu, &one, &OdeOptions::default()).unwrap();
    let b = dense_evolve(&src, &eta, &one, &OdeOptions::default()).unwrap();
    let oracle = dual_norm(a.last(), b.last(), 2).unwrap() / rep.initial_distance;
    let last = rep.rows.last().unwrap().ratio.unwrap();
    assert!(oracle <= 1.0 + 1e-6);
    assert!((oracle - last).abs() < 1e-6, "{oracle} vs {last}");

    let same = lipschitz_probe(&heat, &mu, &mu, &p, &opts, 5).unwrap();
    assert!(same.rows.iter().all(|r| r.ratio.is_none()));
    assert!(same.max_continuity() > 0.0);
}

#[test]
fn mean_field_lipschitz_envelope() {
    let grid = Grid::new(-5.0, 5.0, 256).unwrap();
    let fam = mean_field(0.02, 0.0);
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5).unwrap();
    let p = Partition::with_mesh(0.0, 1.0, 1e-2).unwrap();
    let mut exponents = Vec::new();
    for shift in [0.05, 0.1, 0.2] {
        let eta = GridMeasure::gaussian(grid, 1.0 + shift, 0.5).unwrap();
        let rep = lipschitz_probe(&fam, &mu, &eta, &p, &KineticOptions::default(), 8).unwrap();
        let c = rep.envelope_exponent().unwrap();
        for r in &rep.rows {
            assert!(r.ratio.unwrap() <= (c * r.time).exp() * (1.0 + 1e-12));
        }
        assert!(rep.max_continuity() < 10.0);
        exponents.push(c);
    }
    for c in &exponents {
        assert!(*c > -1.3 && *c < -0.7, "{exponents:?}");
    }
}

#[test]
fn stability_scales_with_drift_shift() {
    let grid = Grid::new(-5.0, 5.0, 256).unwrap();
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5).unwrap();
    let p = Partition::with_mesh(0.0, 1.0, 1e-2).unwrap();
    let opts = KineticOptions::default();
    let base = mean_field(0.02, 0.0);
    let same = stability_compare(&base, &base, &mu, &mu, &p, &opts, 10).unwrap();
    assert_eq!(same.sup_distance, 0.0);
    assert_eq!(same.kappa_hat, 0.0);
    let d: Vec<f64> = [0.01, 0.02, 0.04]
        .iter()
        .map(|&e| {
            let r = stability_compare(&base, &mean_field(0.02, e), &mu, &mu, &p, &opts, 10).unwrap();
            assert!((r.kappa_hat - e).abs() < 1e-12);
            r.sup_distance
        })
        .collect();
    for w in d.windows(2) {
        let q = w[1] / w[0];
        assert!((q - 2.0).abs() < 0.5, "{d:?}");
    }
    let eta = GridMeasure::gaussian(grid, 1.2, 0.5).unwrap();
    let r = stability_compare(&base, &base, &mu, &eta, &p, &opts, 10).unwrap();
    assert_eq!(r.kappa_hat, 0.0);
    let l = lipschitz_probe(&base, &mu, &eta, &p, &opts, 10).unwrap();
    let from_probe = l.max_ratio().unwrap() * l.initial_distance;
    assert!(r.sup_distance >= from_probe - 1e-12);
    assert!((r.ratio.unwrap() - r.sup_distance / r.initial_distance).abs() < 1e-15);
}
