use nlmarkov::generators::{
    assemble_matrix, dual_representation, estimate_levy_lipschitz, gateaux, levy_gateaux, levy_symbol,
    validate_order_one_conditions, Coefficient, Family, JumpMeasure, LevyCoefficients, LevyFamily, OrderOneFamily,
    Profile, Transform,
};
use nlmarkov::measures::{ck_norm, pair};
use nlmarkov::{DenseMatrix, Grid, GridMeasure, TestFunction};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn triplet(g: f64, b: f64, jumps: JumpMeasure<f64>) -> LevyCoefficients<f64> {
    LevyCoefficients {
        diffusion: g,
        drift: b,
        jumps,
        stable: None,
    }
}

fn random_probability(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> GridMeasure<f64> {
    let w: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    GridMeasure::new(*grid, w.into_iter().map(|x| x / s).collect()).unwrap()
}

fn random_signed(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> GridMeasure<f64> {
    let w: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() - 0.5).collect();
    GridMeasure::new(*grid, w).unwrap()
}

fn shifted(mu: &GridMeasure<f64>, xi: &GridMeasure<f64>, s: f64) -> GridMeasure<f64> {
    mu.combine(1.0, xi, s).unwrap()
}

/// Two moment functionals, nonlinear interactions, drift kept positive.
fn smooth_order_one() -> OrderOneFamily<f64> {
    let phis = vec![
        Profile::Sin {
            amplitude: 1.0,
            frequency: 0.7,
            phase: 0.3,
        },
        Profile::Gaussian {
            amplitude: 1.0,
            center: 0.5,
            width: 1.2,
        },
    ];
    let shape = JumpMeasure::points(vec![(-0.6, 0.4), (0.3, 1.0), (1.2, 0.25)]).unwrap();
    OrderOneFamily::new(phis)
        .with_drift(
            Coefficient::constant(2.0)
                .with_interaction(0, 0.5, Transform::Tanh)
                .with_interaction(1, 0.3, Transform::Square),
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: 2.0,
            },
        )
        .with_jumps(
            Coefficient::constant(1.5).with_interaction(1, 0.8, Transform::Tanh),
            Profile::constant(1.0),
            shape,
        )
}

fn smooth_levy() -> LevyFamily<f64> {
    let phis = vec![Profile::identity(), Profile::Sin {
        amplitude: 1.0,
        frequency: 1.0,
        phase: 0.0,
    }];
    LevyFamily::new(phis)
        .with_diffusion(Coefficient::constant(0.5).with_interaction(1, 0.2, Transform::Square))
        .with_drift(Coefficient::constant(1.0).with_interaction(0, 0.4, Transform::Tanh))
        .with_jumps(
            Coefficient::constant(1.0).with_interaction(0, 0.3, Transform::Tanh),
            JumpMeasure::points(vec![(-0.5, 1.0), (1.5, 0.5)]).unwrap(),
        )
}

fn generator(fam: &Family<f64>, mu: &GridMeasure<f64>) -> DenseMatrix<f64> {
    let m = fam.moments(mu).unwrap();
    fam.generator(mu.grid(), 0.0, &m, 0.0).unwrap().matrix
}

#[test]
fn symbol_of_brownian_motion() {
    let eta = levy_symbol(&triplet(1.0, 0.0, JumpMeasure::empty()), &[2.0]).unwrap();
    assert!((eta[0].re + 2.0).abs() < 1e-15 && eta[0].im == 0.0);
}

#[test]
fn symbol_of_pure_drift() {
    let eta = levy_symbol(&triplet(0.0, 1.0, JumpMeasure::empty()), &[3.0]).unwrap();
    assert!(eta[0].re == 0.0 && (eta[0].im - 3.0).abs() < 1e-15);
}

#[test]
fn symbol_of_compound_poisson() {
    let xi = std::f64::consts::FRAC_PI_2;
    let eta = levy_symbol(&triplet(0.0, 0.0, JumpMeasure::dirac(2.0, 0.5).unwrap()), &[xi]).unwrap();
    // 0.5 (e^{iπ} − 1) evaluated independently
    let expected = num_complex::Complex::new(0.0, 2.0 * xi).exp() * 0.5 - 0.5;
    assert!((eta[0] - expected).norm() < 1e-14);
    assert!((eta[0].re + 1.0).abs() < 1e-14 && eta[0].im.abs() < 1e-14);
}

#[test]
fn negative_diffusion_is_rejected() {
    let err = levy_symbol(&triplet(-1.0, 0.0, JumpMeasure::empty()), &[1.0]);
    assert!(matches!(err, Err(nlmarkov::Error::Invariant(_))));
}

#[test]
fn jump_measures_reject_the_origin_and_negative_rates() {
    assert!(JumpMeasure::dirac(0.0, 1.0).is_err());
    assert!(JumpMeasure::dirac(1.0, -1.0).is_err());
    let lattice = JumpMeasure::lattice(1.0, 5, &Profile::constant(1.0)).unwrap();
    assert_eq!(lattice.len(), 4);
}

proptest! {
    #[test]
    fn symbol_is_dissipative_and_hermitian(
        g in 0.0..3.0f64,
        b in -2.0..2.0f64,
        jumps in prop::collection::vec((-3.0..3.0f64, 0.0..2.0f64), 0..5),
        xi in -20.0..20.0f64,
    ) {
        let jumps: Vec<_> = jumps.into_iter().filter(|p| p.0 != 0.0).collect();
        let c = triplet(g, b, JumpMeasure::points(jumps).unwrap());
        let eta = levy_symbol(&c, &[xi, -xi, 0.0]).unwrap();
        prop_assert!(eta[0].re <= 1e-12);
        prop_assert!((eta[0] - eta[1].conj()).norm() <= 1e-12 * (1.0 + eta[0].norm()));
        prop_assert!(eta[2].norm() == 0.0);
    }
}

#[test]
fn zero_family_gives_zero_matrix() {
    let grid = Grid::new(-1.0, 1.0, 16).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.0, 0.3).unwrap();
    let a = assemble_matrix(&OrderOneFamily::new(vec![]), &mu, 0.0, 0.0).unwrap();
    assert!(a.matrix.data().iter().all(|&v| v == 0.0));
    assert_eq!(a.lost_rate, 0.0);
}

#[test]
fn unit_drift_differentiates_linear_functions() {
    let grid = Grid::new(-1.0, 1.0, 32).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.0, 0.3).unwrap();
    let fam = OrderOneFamily::new(vec![]).with_drift(Coefficient::constant(1.0), Profile::constant(1.0));
    let a = assemble_matrix(&fam, &mu, 0.0, 0.0).unwrap();
    let af: Vec<f64> = a.matrix.matvec(&grid.nodes());
    for v in &af[1..31] {
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn shift_jump_matches_hand_stencil() {
    let grid = Grid::new(0.0, 1.0, 16).unwrap();
    let h = grid.spacing();
    let mu = GridMeasure::gaussian(grid, 0.5, 0.2).unwrap();
    let fam = OrderOneFamily::new(vec![]).with_jumps(
        Coefficient::constant(1.0),
        Profile::constant(1.0),
        JumpMeasure::dirac(3.0 * h, 1.0).unwrap(),
    );
    let a = assemble_matrix(&fam, &mu, 0.0, 0.0).unwrap();
    let bump = |x: f64| 0.5 * (1.0 + ((x - 0.4) / 0.1).tanh()) * 0.5 * (1.0 - ((x - 0.7) / 0.1).tanh());
    let f: Vec<f64> = grid.nodes().into_iter().map(bump).collect();
    let af = a.matrix.matvec(&f);
    for i in 0..16 {
        let expected = if i + 3 < 16 { f[i + 3] - f[i] } else { 0.0 };
        assert!((af[i] - expected).abs() < 1e-14, "node {i}");
    }
    assert_eq!(a.lost_rate, 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn order_one_generators_are_conservative_and_positive(
        seed in any::<u64>(),
        base in -2.0..2.0f64,
        amp in 0.0..1.5f64,
        rates in prop::collection::vec((-0.8..0.8f64, 0.0..2.0f64), 1..4),
    ) {
        let grid = Grid::new(-2.0, 2.0, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = random_probability(&grid, &mut rng);
        let jumps: Vec<_> = rates.into_iter().filter(|p| p.0 != 0.0).collect();
        prop_assume!(!jumps.is_empty());
        let fam = OrderOneFamily::new(vec![Profile::identity()])
            .with_drift(Coefficient::linear(base, 0, 0.7), Profile::Sin { amplitude: 1.0, frequency: 1.3, phase: 0.2 })
            .with_jumps(
                Coefficient::constant(1.0).with_interaction(0, amp, Transform::Square),
                Profile::Gaussian { amplitude: 1.0, center: 0.0, width: 1.0 },
                JumpMeasure::points(jumps).unwrap(),
            );
        let a = assemble_matrix(&fam, &mu, 0.0, 0.0).unwrap().matrix;
        let ones = vec![1.0; grid.len()];
        let row_sums = a.matvec(&ones);
        for r in &row_sums {
            prop_assert!(r.abs() <= 1e-8);
        }
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                if i != j {
                    prop_assert!(a.get(i, j) >= -1e-12);
                }
            }
        }
        let flux = a.matvec_transpose(mu.weights());
        prop_assert!(flux.iter().sum::<f64>().abs() <= 1e-8);
    }
}

#[test]
fn measure_independent_family_has_zero_derivatives() {
    let grid = Grid::new(-2.0, 2.0, 24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mu = random_probability(&grid, &mut rng);
    let xi = random_signed(&grid, &mut rng);
    let fam: Family<f64> = OrderOneFamily::new(vec![Profile::identity()])
        .with_drift(Coefficient::constant(1.0), Profile::identity())
        .into();
    assert!(fam.is_measure_independent());
    assert!(gateaux(&fam, &mu, &xi, 0.0, 0.0).unwrap().data().iter().all(|&v| v == 0.0));
    assert_eq!(dual_representation(&fam, &mu, 0.0, 0.0).unwrap().rank(), 0);
}

#[test]
fn linear_dependence_gives_exact_derivative() {
    let grid = Grid::new(-2.0, 2.0, 24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mu = random_probability(&grid, &mut rng);
    let xi = random_signed(&grid, &mut rng);
    let phi = Profile::Sin {
        amplitude: 1.0,
        frequency: 0.9,
        phase: 0.1,
    };
    let shape = JumpMeasure::points(vec![(0.5, 1.0), (-1.0, 0.5)]).unwrap();
    let a1_family = OrderOneFamily::new(vec![])
        .with_jumps(Coefficient::constant(1.0), Profile::constant(1.0), shape.clone());
    let fam: Family<f64> = OrderOneFamily::new(vec![phi.clone()])
        .with_drift(Coefficient::constant(1.0), Profile::constant(1.0))
        .with_jumps(Coefficient::linear(2.0, 0, 1.0), Profile::constant(1.0), shape)
        .into();
    let a1 = assemble_matrix(&a1_family, &mu, 0.0, 0.0).unwrap().matrix;
    let phi_tf = phi.test_function(&grid).unwrap();
    let scale = pair(&phi_tf, &xi).unwrap();
    let d = gateaux(&fam, &mu, &xi, 0.0, 0.0).unwrap();
    assert!(d.max_abs_diff(&a1.scaled(scale)) < 1e-13);

    let f = dual_representation(&fam, &mu, 0.0, 0.0).unwrap();
    assert_eq!(f.rank(), 1);
    let g: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() - 0.5).collect();
    let c = pair(&TestFunction::new(grid, a1.matvec(&g), 0).unwrap(), &mu).unwrap();
    let fg = f.apply(&g);
    for (v, p) in fg.iter().zip(phi_tf.values()) {
        assert!((v - c * p).abs() < 1e-13);
    }
}

fn gateaux_fd_errors(fam: &Family<f64>, seed: u64) {
    let grid = Grid::new(-3.0, 3.0, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu = random_probability(&grid, &mut rng);
    let xi = random_signed(&grid, &mut rng);
    let d = gateaux(fam, &mu, &xi, 0.0, 0.0).unwrap();
    let a0 = generator(fam, &mu);
    let fd = |s: f64| {
        let mut m = generator(fam, &shifted(&mu, &xi, s));
        m.axpy(-1.0, &a0);
        m.scaled(1.0 / s)
    };
    // Richardson at s = 1e-4, 1e-5
    let (f4, f5) = (fd(1e-4), fd(1e-5));
    let mut rich = f5.scaled(10.0 / 9.0);
    rich.axpy(-1.0 / 9.0, &f4);
    assert!(rich.max_abs_diff(&d) < 1e-6, "richardson defect {}", rich.max_abs_diff(&d));
    // first-order convergence of the plain quotient
    let e2 = fd(1e-2).max_abs_diff(&d);
    let e3 = fd(1e-3).max_abs_diff(&d);
    let slope = (e2 / e3).log10();
    assert!((slope - 1.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn order_one_gateaux_matches_finite_differences() {
    gateaux_fd_errors(&smooth_order_one().into(), 3);
}

#[test]
fn levy_gateaux_matches_finite_differences() {
    gateaux_fd_errors(&smooth_levy().into(), 4);
}

#[test]
fn levy_gateaux_increment_is_the_chain_rule() {
    let grid = Grid::new(-3.0, 3.0, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mu = random_probability(&grid, &mut rng);
    let xi = random_signed(&grid, &mut rng);
    let fam = smooth_levy();
    let family: Family<f64> = fam.clone().into();
    let inc = levy_gateaux(&fam, &mu, &xi, 0.0, 0.0).unwrap();
    let coeffs = |s: f64| {
        let m = family.moments(&shifted(&mu, &xi, s)).unwrap();
        fam.coefficients_at(0.0, &m, 0.0)
    };
    let (p, q) = (coeffs(1e-6), coeffs(-1e-6));
    assert!(((p.diffusion - q.diffusion) / 2e-6 - inc.diffusion).abs() < 1e-7);
    assert!(((p.drift - q.drift) / 2e-6 - inc.drift).abs() < 1e-7);
    for ((a, b), c) in p.jumps.weights().iter().zip(q.jumps.weights()).zip(inc.jumps.weights()) {
        assert!(((a - b) / 2e-6 - c).abs() < 1e-7);
    }
}

#[test]
fn dual_representation_defect_is_round_off() {
    let grid = Grid::new(-3.0, 3.0, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mu = random_probability(&grid, &mut rng);
    for fam in [Family::from(smooth_order_one()), Family::from(smooth_levy())] {
        let f = dual_representation(&fam, &mu, 0.0, 0.0).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let xi = random_signed(&grid, &mut rng);
            let g: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let d = gateaux(&fam, &mu, &xi, 0.0, 0.0).unwrap();
            let lhs: f64 = d.matvec(&g).iter().zip(mu.weights()).map(|(a, b)| a * b).sum();
            let rhs: f64 = f.apply(&g).iter().zip(xi.weights()).map(|(a, b)| a * b).sum();
            let dual: f64 = f.apply_dual(xi.weights()).iter().zip(&g).map(|(a, b)| a * b).sum();
            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
            worst = worst.max((rhs - dual).abs() / lhs.abs().max(1.0));
        }
        assert!(worst <= 1e-10, "defect {worst}");
    }
}

fn lipschitz_samples(grid: &Grid<f64>, seed: u64, count: usize) -> Vec<(GridMeasure<f64>, GridMeasure<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (random_probability(grid, &mut rng), random_probability(grid, &mut rng)))
        .collect()
}

#[test]
fn lipschitz_of_measure_independent_family_is_zero() {
    let grid = Grid::new(-2.0, 2.0, 32).unwrap();
    let fam = LevyFamily::new(vec![]).with_diffusion(Coefficient::constant(1.0));
    let est = estimate_levy_lipschitz(&fam, &lipschitz_samples(&grid, 7, 4), 0.0, 0.0).unwrap();
    assert_eq!(est.kappa, 0.0);
}

fn normalized_phi(grid: &Grid<f64>) -> Profile<f64> {
    let raw = TestFunction::from_fn(*grid, 2, |x| (0.8 * x).sin() + 0.3 * x).unwrap();
    let norm = ck_norm(&raw, 2).unwrap();
    Profile::Table {
        values: raw.values().iter().map(|v| v / norm).collect(),
    }
}

#[test]
fn lipschitz_of_linear_drift_respects_duality() {
    let grid = Grid::new(-2.0, 2.0, 64).unwrap();
    let fam = LevyFamily::new(vec![normalized_phi(&grid)]).with_drift(Coefficient::linear(0.0, 0, 1.0));
    let est = estimate_levy_lipschitz(&fam, &lipschitz_samples(&grid, 8, 6), 0.0, 0.0).unwrap();
    assert!(est.kappa > 0.0 && est.kappa <= 1.0 + 0.05, "κ̂ = {}", est.kappa);
    assert!(est.argmax.is_some());
}

#[test]
fn lipschitz_scales_linearly() {
    let grid = Grid::new(-2.0, 2.0, 32).unwrap();
    let samples = lipschitz_samples(&grid, 9, 3);
    let kappa = |c: f64| {
        let fam = LevyFamily::new(vec![normalized_phi(&grid)]).with_drift(Coefficient::linear(0.0, 0, c));
        estimate_levy_lipschitz(&fam, &samples, 0.0, 0.0).unwrap().kappa
    };
    let k1 = kappa(1.0);
    assert!((kappa(2.0) - 2.0 * k1).abs() < 1e-9 * k1);
    assert!((kappa(4.0) - 4.0 * k1).abs() < 1e-9 * k1);
}

#[test]
fn coincident_pairs_are_skipped() {
    let grid = Grid::new(-2.0, 2.0, 32).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.0, 0.5).unwrap();
    let fam = LevyFamily::new(vec![Profile::identity()]).with_drift(Coefficient::linear(0.0, 0, 1.0));
    let est = estimate_levy_lipschitz(&fam, &[(mu.clone(), mu)], 0.0, 0.0).unwrap();
    assert_eq!(est.skipped, 1);
    assert_eq!(est.argmax, None);
    assert!(estimate_levy_lipschitz(&fam, &[], 0.0, 0.0).is_err());
}

#[test]
fn compact_kernel_passes_all_conditions() {
    let grid = Grid::new(-5.0, 5.0, 64).unwrap();
    let rho: Vec<(f64, f64)> = vec![(-1.5, 0.3), (-0.5, 0.7), (0.25, 1.1), (2.0, 0.4)];
    let fam = OrderOneFamily::new(vec![]).with_jumps(
        Coefficient::constant(1.0),
        Profile::constant(1.0),
        JumpMeasure::points(rho.clone()).unwrap(),
    );
    let mu = GridMeasure::gaussian(grid, 0.0, 1.0).unwrap();
    let report = validate_order_one_conditions(&fam, &grid, 1e-3, &[mu], 0.0, 0.0).unwrap();
    let quadrature: f64 = rho.iter().map(|(y, w)| y.abs().min(1.0) * w).sum();
    assert!((report.boundedness - quadrature).abs() < 1e-14);
    assert!(report.passed(), "{report:?}");
    assert!(report.cut.is_some());
    assert_eq!(report.gradient_bound, 0.0);
}

#[test]
fn far_tail_mass_fails_tightness() {
    let grid = Grid::new(-5.0, 5.0, 64).unwrap();
    let eps = 1e-2;
    let fam = OrderOneFamily::new(vec![]).with_jumps(
        Coefficient::constant(1.0),
        Profile::constant(1.0),
        JumpMeasure::points(vec![(1.0, 1.0), (4.0, 2.0 * eps)]).unwrap(),
    );
    let report = validate_order_one_conditions(&fam, &grid, eps, &[], 0.0, 0.0).unwrap();
    assert!(!report.tight);
    assert!(report.tail >= 2.0 * eps - 1e-15);
    assert!(report.bounded);
}

#[test]
fn measure_independent_drift_has_zero_lipschitz_ratio() {
    let grid = Grid::new(-3.0, 3.0, 32).unwrap();
    let fam = OrderOneFamily::new(vec![Profile::identity()]).with_drift(
        Coefficient::constant(1.0),
        Profile::Sin {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let samples: Vec<_> = (0..3).map(|_| random_probability(&grid, &mut rng)).collect();
    let report = validate_order_one_conditions(&fam, &grid, 1e-3, &samples, 0.0, 0.0).unwrap();
    assert_eq!(report.lipschitz_drift, 0.0);
    assert!(report.lipschitz);
}

#[test]
fn measure_dependent_drift_has_positive_lipschitz_ratio() {
    let grid = Grid::new(-3.0, 3.0, 32).unwrap();
    let fam = OrderOneFamily::new(vec![Profile::identity()])
        .with_drift(Coefficient::linear(1.0, 0, 1.0), Profile::constant(1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples: Vec<_> = (0..3).map(|_| random_probability(&grid, &mut rng)).collect();
    let report = validate_order_one_conditions(&fam, &grid, 1e-3, &samples, 0.0, 0.0).unwrap();
    assert!(report.lipschitz_drift > 0.0 && report.lipschitz_drift.is_finite());
}

#[test]
fn stable_terms_have_no_matrix_form() {
    let grid = Grid::new(-3.0, 3.0, 32).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.0, 1.0).unwrap();
    let fam: Family<f64> = LevyFamily::new(vec![]).with_stable(1.5, 1.0).into();
    let m = fam.moments(&mu).unwrap();
    assert!(matches!(fam.generator(mu.grid(), 0.0, &m, 0.0), Err(nlmarkov::Error::Unsupported(_))));
}

#[test]
fn families_round_trip_through_json() {
    let fam: Family<f64> = smooth_order_one().into();
    let text = serde_json::to_string(&fam).unwrap();
    let back: Family<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(fam, back);
    let lev: Family<f64> = smooth_levy().with_stable(1.2, 0.1).into();
    let back: Family<f64> = serde_json::from_str(&serde_json::to_string(&lev).unwrap()).unwrap();
    assert_eq!(lev, back);
}

#[test]
fn f32_assembly_agrees_with_f64() {
    let g32 = Grid::<f32>::new(-2.0, 2.0, 16).unwrap();
    let g64 = Grid::<f64>::new(-2.0, 2.0, 16).unwrap();
    let fam32 = OrderOneFamily::<f32>::new(vec![])
        .with_drift(Coefficient::constant(0.5), Profile::identity())
        .with_jumps(Coefficient::constant(1.0), Profile::constant(1.0), JumpMeasure::dirac(0.5, 1.0).unwrap());
    let fam64 = OrderOneFamily::<f64>::new(vec![])
        .with_drift(Coefficient::constant(0.5), Profile::identity())
        .with_jumps(Coefficient::constant(1.0), Profile::constant(1.0), JumpMeasure::dirac(0.5, 1.0).unwrap());
    let a = assemble_matrix(&fam32, &GridMeasure::gaussian(g32, 0.0, 1.0).unwrap(), 0.0, 0.0).unwrap();
    let b = assemble_matrix(&fam64, &GridMeasure::gaussian(g64, 0.0, 1.0).unwrap(), 0.0, 0.0).unwrap();
    for (x, y) in a.matrix.data().iter().zip(b.matrix.data()) {
        assert!((*x as f64 - y).abs() < 1e-5 * (1.0 + y.abs()));
    }
}
