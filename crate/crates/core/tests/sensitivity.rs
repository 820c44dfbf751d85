use nlmarkov::generators::{dual_representation, Coefficient, Family, LevyFamily, Profile};
use nlmarkov::linear_prop::{Freeze, Partition, Propagator, StepInput};
use nlmarkov::measures::{dual_norm, pair};
use nlmarkov::nonlinear::{solve_kinetic, solve_kinetic_on, EngineChoice, KineticOptions, KineticSolution};
use nlmarkov::oracles::{dopri5, OdeOptions};
use nlmarkov::perturbation::{Perturbation, PerturbedHandle};
use nlmarkov::sensitivity::{fd_validate, initial_data_derivative, linearized_propagate};
use nlmarkov::{Error, Grid, GridMeasure, TestFunction};

/// Drift `−α·(x, μ)` plus constant diffusion.
fn mean_field(g: f64) -> Family<f64> {
    Family::Levy(
        LevyFamily::new(vec![Profile::identity()])
            .with_diffusion(Coefficient::constant(g))
            .with_drift(Coefficient::linear(0.0, 0, -1.0).scaling_interaction_by_alpha()),
    )
}

fn mean_field_run(n: usize, mesh: f64, tol: f64) -> KineticSolution<f64> {
    let grid = Grid::new(-5.0, 5.0, n).unwrap();
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5).unwrap();
    let opts = KineticOptions {
        alpha: 1.0,
        tol,
        ..Default::default()
    };
    solve_kinetic(&mean_field(0.02), &mu, 1.0, mesh, &opts).unwrap()
}

fn x_moment(xi: &GridMeasure<f64>) -> f64 {
    pair(&TestFunction::from_fn(*xi.grid(), 0, |x| x).unwrap(), xi).unwrap()
}

fn sup_weight(xi: &GridMeasure<f64>) -> f64 {
    xi.weights().iter().map(|w| w.abs()).fold(0.0, f64::max)
}

#[test]
fn zero_source_and_zero_start_give_zero() {
    let grid = Grid::new(-5.0, 5.0, 128).unwrap();
    let fam = Family::Levy(LevyFamily::new(vec![Profile::identity()]).with_drift(Coefficient::linear(0.1, 0, -0.5)));
    let mu = GridMeasure::gaussian(grid, 0.5, 0.6).unwrap();
    let base = solve_kinetic(&fam, &mu, 0.5, 0.01, &KineticOptions::default()).unwrap();
    let run = linearized_propagate(&base, &GridMeasure::zeros(grid)).unwrap();
    assert!(run.curve.values().iter().all(|x| sup_weight(x) == 0.0));
    let run = initial_data_derivative(&base, &GridMeasure::zeros(grid)).unwrap();
    assert!(run.curve.values().iter().all(|x| sup_weight(x) == 0.0));
}

#[test]
fn alpha_drift_matches_variation_of_constants() {
    let grid = Grid::new(-4.0, 4.0, 64).unwrap();
    let fam = Family::Levy(
        LevyFamily::new(vec![])
            .with_diffusion(Coefficient::constant(0.2))
            .with_drift(Coefficient::constant(0.3).with_alpha_slope(1.0)),
    );
    let mu = GridMeasure::gaussian(grid, 0.0, 0.7).unwrap();
    let opts = KineticOptions {
        engine: EngineChoice::Matrix,
        ..Default::default()
    };
    let base = solve_kinetic(&fam, &mu, 1.0, 0.05, &opts).unwrap();
    let run = linearized_propagate(&base, &GridMeasure::zeros(grid)).unwrap();
    let a = fam.generator(&grid, 0.0, &[], 0.0).unwrap().matrix;
    let e = fam.alpha_derivative(&grid, 0.0, &[], 0.0).unwrap();
    let n = grid.len();
    let mut y0 = mu.weights().to_vec();
    y0.extend(vec![0.0; n]);
    let rhs = |_: f64, y: &[f64]| {
        let mut out = a.matvec_transpose(&y[..n]);
        let mut xi = a.matvec_transpose(&y[n..]);
        for (x, s) in xi.iter_mut().zip(e.matvec_transpose(&y[..n])) {
            *x += s;
        }
        out.extend(xi);
        Ok(out)
    };
    let y = dopri5(rhs, 0.0, 1.0, &y0, &OdeOptions::default()).unwrap();
    let err = y[n..]
        .iter()
        .zip(run.curve.last().weights())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
    assert!(run.mass_defect() < 1e-8);
}

#[test]
fn mean_field_parameter_derivative() {
    let base = mean_field_run(512, 1e-3, 1e-10);
    let run = linearized_propagate(&base, &GridMeasure::zeros(*base.curve.grid())).unwrap();
    let d = x_moment(run.curve.last());
    assert!((d + (-1.0f64).exp()).abs() < 1e-3, "{d}");
    assert!(run.mass_defect() < 1e-8);
}

#[test]
fn mean_field_initial_data_derivative() {
    let base = mean_field_run(512, 1e-3, 1e-10);
    let grid = *base.curve.grid();
    let xi = GridMeasure::gaussian_dipole(grid, 1.0, 0.5).unwrap();
    assert!((x_moment(&xi) - 1.0).abs() < 1e-12);
    let run = initial_data_derivative(&base, &xi).unwrap();
    let d = x_moment(run.curve.last());
    assert!((d - (-1.0f64).exp()).abs() < 1e-3, "{d}");
    assert!(run.mass_defect() < 1e-8);
    let bad = GridMeasure::gaussian(grid, 0.0, 1.0).unwrap();
    assert!(matches!(initial_data_derivative(&base, &bad), Err(Error::InvalidArgument(_))));
}

#[test]
fn linear_family_derivative_is_plain_dual_propagation() {
    let grid = Grid::new(-6.0, 6.0, 128).unwrap();
    let lf = LevyFamily::new(vec![]).with_diffusion(Coefficient::constant(0.3)).with_drift(Coefficient::constant(-0.2));
    let fam = Family::Levy(lf.clone());
    let mu = GridMeasure::gaussian(grid, 0.0, 1.0).unwrap();
    let base = solve_kinetic(&fam, &mu, 0.6, 0.02, &KineticOptions::default()).unwrap();
    let xi = GridMeasure::gaussian_dipole(grid, 0.5, 0.7).unwrap();
    let run = initial_data_derivative(&base, &xi).unwrap();
    let p = base.partition.clone();
    let inputs = StepInput::unfrozen(&fam, &p, Freeze::LeftEndpoint).unwrap();
    let lin = Propagator::spectral_from_inputs(&lf, &grid, &p, inputs, 0.0).unwrap();
    let want = lin.dual_apply(&xi, 0.6, 0.0).unwrap();
    let gap = run.curve.last().sub(&want).unwrap();
    // stepwise folding of the padded transform versus a single fold
    assert!(sup_weight(&gap) < 1e-10, "{}", sup_weight(&gap));
}

#[test]
fn derivative_is_linear_and_chains() {
    let grid = Grid::new(-5.0, 5.0, 256).unwrap();
    let fam = Family::Levy(
        LevyFamily::new(vec![Profile::identity(), Profile::Sin {
            amplitude: 1.0,
            frequency: 0.8,
            phase: 0.2,
        }])
        .with_diffusion(Coefficient::linear(0.1, 1, 0.05))
        .with_drift(Coefficient::linear(0.2, 0, -0.7)),
    );
    let mu = GridMeasure::gaussian(grid, 0.4, 0.6).unwrap();
    let opts = KineticOptions {
        tol: 1e-13,
        ..Default::default()
    };
    let base = solve_kinetic(&fam, &mu, 0.5, 5e-3, &opts).unwrap();
    let a = GridMeasure::gaussian_dipole(grid, 0.4, 0.6).unwrap();
    let b = GridMeasure::gaussian(grid, 1.0, 0.3).unwrap().sub(&GridMeasure::gaussian(grid, -0.2, 0.5).unwrap()).unwrap();
    let ra = initial_data_derivative(&base, &a).unwrap();
    let rb = initial_data_derivative(&base, &b).unwrap();
    let rab = initial_data_derivative(&base, &a.combine(2.0, &b, -3.0).unwrap()).unwrap();
    for j in [10, 50, 100] {
        let sum = ra.curve.values()[j].combine(2.0, &rb.curve.values()[j], -3.0).unwrap();
        assert!(sup_weight(&sum.sub(&rab.curve.values()[j]).unwrap()) < 1e-10);
    }
    assert!(ra.mass_defect() < 1e-8 && rb.mass_defect() < 1e-8);

    // Π^{t,s} Π^{s,0} = Π^{t,0}
    let s = 40;
    let restart = solve_kinetic_on(&fam, &base.curve.values()[s], &base.partition.slice(s, 100).unwrap(), &opts).unwrap();
    let tail = initial_data_derivative(&restart, &ra.curve.values()[s]).unwrap();
    let gap = tail.curve.last().sub(ra.curve.last()).unwrap();
    assert!(sup_weight(&gap) < 1e-9, "{}", sup_weight(&gap));
}

#[test]
fn derivative_predicts_nonlinear_response() {
    let grid = Grid::new(-5.0, 5.0, 256).unwrap();
    let fam = mean_field(0.05);
    let mu = GridMeasure::gaussian(grid, 1.0, 0.5).unwrap();
    let eta = GridMeasure::gaussian(grid, 0.6, 0.7).unwrap();
    let xi = eta.sub(&mu).unwrap();
    let opts = KineticOptions {
        alpha: 1.0,
        tol: 1e-13,
        ..Default::default()
    };
    let p = Partition::with_mesh(0.0, 1.0, 1e-2).unwrap();
    let base = solve_kinetic_on(&fam, &mu, &p, &opts).unwrap();
    let lin = initial_data_derivative(&base, &xi).unwrap();
    let mut scaled = Vec::new();
    for eps in [1e-2, 1e-3] {
        let moved = solve_kinetic_on(&fam, &mu.combine(1.0, &xi, eps).unwrap(), &p, &opts).unwrap();
        let gap = moved
            .final_measure()
            .sub(base.final_measure())
            .unwrap()
            .combine(1.0, lin.curve.last(), -eps)
            .unwrap();
        scaled.push(dual_norm(&gap, &GridMeasure::zeros(grid), 2).unwrap() / eps);
    }
    assert!(scaled[1] * 5.0 <= scaled[0], "{scaled:?}");
}

#[test]
fn agrees_with_perturbed_dual_propagation() {
    // ξ_t = Ψ^{t,0}ξ with F_s = D_ξ A[μ_s] represented as a finite-rank operator
    let gaps: Vec<f64> = [2e-2, 1e-2]
        .iter()
        .map(|&mesh| {
            let base = mean_field_run(256, mesh, 1e-12);
            let grid = *base.curve.grid();
            let xi = GridMeasure::gaussian_dipole(grid, 1.0, 0.5).unwrap();
            let tangent = initial_data_derivative(&base, &xi).unwrap();
            let fam = &base.family;
            let lf = fam.as_levy().unwrap();
            let inputs = StepInput::from_curve(fam, &base.curve, &base.partition, Freeze::LeftEndpoint).unwrap();
            let u = Propagator::spectral_from_inputs(lf, &grid, &base.partition, inputs, 1.0).unwrap();
            let ops = base
                .partition
                .nodes()
                .iter()
                .zip(base.curve.values())
                .map(|(&t, m)| dual_representation(fam, m, t, 1.0).unwrap())
                .collect();
            let h = PerturbedHandle::new(&u, Perturbation::LowRank(ops)).unwrap();
            let (curve, _) = h.dual_curve(&xi, 0).unwrap();
            (x_moment(curve.last().unwrap()) - x_moment(tangent.curve.last())).abs()
        })
        .collect();
    assert!(gaps[0] < 2e-2, "{gaps:?}");
    assert!(gaps[1] < gaps[0] * 0.7, "{gaps:?}");
}

#[test]
fn finite_differences_confirm_the_linearization() {
    let grid = Grid::new(-5.0, 5.0, 256).unwrap();
    let mu0 = |a: f64| GridMeasure::gaussian(grid, 1.0 + 0.2 * a, 0.5);
    let p = Partition::with_mesh(0.0, 1.0, 1e-2).unwrap();
    let opts = KineticOptions {
        tol: 1e-13,
        ..Default::default()
    };
    // drift linear in α
    let linear = Family::Levy(
        LevyFamily::new(vec![Profile::identity()])
            .with_diffusion(Coefficient::constant(0.02))
            .with_drift(Coefficient::linear(0.0, 0, -1.0).with_alpha_slope(0.5)),
    );
    let rep = fd_validate(&linear, &|a| mu0(a), 1.0, &[1e-2, 1e-3], &p, &opts, 5).unwrap();
    assert!(rep.rows[1].defect <= 1e-4, "{rep:?}");

    let rep = fd_validate(&mean_field(0.02), &|a| mu0(a), 1.0, &[1e-2, 1e-3], &p, &opts, 5).unwrap();
    assert!(rep.rows[0].defect >= 50.0 * rep.rows[1].defect, "{rep:?}");
    assert!(rep.fitted_order.unwrap() > 1.5);
    assert!(rep.integral_defect < 1e-4, "{rep:?}");

    let fixed = |_: f64| GridMeasure::gaussian(grid, 1.0, 0.5);
    let still = Family::Levy(LevyFamily::new(vec![Profile::identity()]).with_drift(Coefficient::linear(0.0, 0, -1.0)));
    let rep = fd_validate(&still, &fixed, 1.0, &[1e-2, 1e-3], &p, &opts, 3).unwrap();
    assert!(rep.rows.iter().all(|r| r.defect == 0.0));
    assert!(fd_validate(&still, &fixed, 1.0, &[1e-3, 1e-2], &p, &opts, 3).is_err());
}
