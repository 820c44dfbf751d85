use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nlmarkov::measures::{ck_norm, dual_norm, dual_norm_upper_bound, max_dual_norm, pair};
use nlmarkov::{Grid, Grid64, GridMeasure, TestFunction};
use proptest::prelude::*;

/// Independent dense formulation of the dual-norm program with unscaled difference quotients.
fn lp_oracle(d: &[f64], h: f64, k: usize) -> f64 {
    let n = d.len();
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let f: Vec<_> = d.iter().map(|&di| p.add_var(di, (-10.0, 10.0))).collect();
    let a: Vec<_> = (0..=k).map(|_| p.add_var(0.0, (0.0, 1.0))).collect();
    for i in 0..n {
        p.add_constraint([(f[i], 1.0), (a[0], -1.0)], ComparisonOp::Le, 0.0);
        p.add_constraint([(f[i], -1.0), (a[0], -1.0)], ComparisonOp::Le, 0.0);
    }
    if k >= 1 {
        for i in 0..n - 1 {
            let (u, v) = (1.0 / h, -1.0 / h);
            p.add_constraint([(f[i + 1], u), (f[i], v), (a[1], -1.0)], ComparisonOp::Le, 0.0);
            p.add_constraint([(f[i + 1], -u), (f[i], -v), (a[1], -1.0)], ComparisonOp::Le, 0.0);
        }
    }
    if k >= 2 {
        let q = 1.0 / (h * h);
        for i in 0..n - 2 {
            let row = [(f[i], q), (f[i + 1], -2.0 * q), (f[i + 2], q), (a[2], -1.0)];
            p.add_constraint(row, ComparisonOp::Le, 0.0);
            let row = [(f[i], -q), (f[i + 1], 2.0 * q), (f[i + 2], -q), (a[2], -1.0)];
            p.add_constraint(row, ComparisonOp::Le, 0.0);
        }
    }
    let all: Vec<_> = a.iter().map(|&v| (v, 1.0)).collect();
    p.add_constraint(&all, ComparisonOp::Le, 1.0);
    p.solve().expect("oracle LP solves").objective()
}

fn signed(grid: Grid<f64>, w: Vec<f64>) -> GridMeasure<f64> {
    GridMeasure::new(grid, w).unwrap()
}

fn prob_from(grid: Grid<f64>, raw: &[f64]) -> GridMeasure<f64> {
    let s: f64 = raw.iter().sum();
    signed(grid, raw.iter().map(|x| x / s).collect())
}

#[test]
fn pair_constant_and_zero() {
    let g = Grid64::new(-5.0, 5.0, 64).unwrap();
    let mu = GridMeasure::gaussian(g, 0.3, 1.2).unwrap();
    assert!((pair(&TestFunction::constant(g, 1.0), &mu).unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(pair(&TestFunction::constant(g, 0.0), &mu).unwrap(), 0.0);
}

#[test]
fn pair_first_moment_of_normal_matches_quadrature() {
    let g = Grid64::new(-5.0, 5.0, 512).unwrap();
    let mu = GridMeasure::gaussian(g, 0.0, 1.0).unwrap();
    let x = TestFunction::from_fn(g, 2, |x| x).unwrap();
    // Composite Simpson quadrature of x·φ(x) on [−5, 5] with 20000 panels.
    let m = 20000;
    let hq = 10.0 / m as f64;
    let phi = |x: f64| x * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let simpson: f64 = (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * phi(-5.0 + i as f64 * hq)
        })
        .sum::<f64>()
        * hq
        / 3.0;
    let value = pair(&x, &mu).unwrap();
    assert!((value - simpson).abs() < 1e-6, "{value} vs {simpson}");
    assert!(value.abs() < 1e-6);
}

#[test]
fn pair_rejects_grid_mismatch() {
    let g1 = Grid64::new(-1.0, 1.0, 16).unwrap();
    let g2 = Grid64::new(-1.0, 1.0, 32).unwrap();
    let err = pair(&TestFunction::constant(g1, 1.0), &GridMeasure::zeros(g2)).unwrap_err();
    assert!(matches!(err, nlmarkov::Error::Dimension(_)));
}

#[test]
fn ck_norm_of_constant() {
    let g = Grid64::new(0.0, 1.0, 16).unwrap();
    for k in 0..=2 {
        assert!((ck_norm(&TestFunction::constant(g, -3.5), k).unwrap() - 3.5).abs() < 1e-14);
    }
}

#[test]
fn ck_norm_of_sine_refines_to_two() {
    let mut last = f64::NAN;
    for n in [1024, 4096] {
        let g = Grid64::new(0.0, 2.0 * std::f64::consts::PI, n).unwrap();
        let f = TestFunction::from_fn(g, 1, f64::sin).unwrap();
        last = ck_norm(&f, 1).unwrap();
    }
    assert!((last - 2.0).abs() < 1e-3, "{last}");
}

#[test]
fn ck_norm_of_half_square() {
    let g = Grid64::new(-1.0, 1.0, 2048).unwrap();
    let f = TestFunction::from_fn(g, 2, |x| 0.5 * x * x).unwrap();
    let v = ck_norm(&f, 2).unwrap();
    assert!((v - 2.5).abs() < 1e-3, "{v}");
}

#[test]
fn ck_norm_rejects_order_above_declared() {
    let g = Grid64::new(0.0, 1.0, 16).unwrap();
    let f = TestFunction::from_fn(g, 0, |x| x).unwrap();
    assert!(ck_norm(&f, 1).is_err());
}

#[test]
fn dual_norm_of_equal_measures_is_zero() {
    let g = Grid64::new(-2.0, 2.0, 32).unwrap();
    let mu = GridMeasure::gaussian(g, 0.0, 0.5).unwrap();
    for k in 0..=2 {
        assert_eq!(dual_norm(&mu, &mu, k).unwrap(), 0.0);
    }
}

#[test]
fn two_point_diracs_at_order_one() {
    let g = Grid64::new(-1.0, 1.0, 10).unwrap();
    let h = g.spacing();
    assert!((h - 0.2).abs() < 1e-15);
    let a = GridMeasure::dirac(g, 0.0).unwrap();
    let b = GridMeasure::dirac(g, h).unwrap();
    let v = dual_norm(&a, &b, 1).unwrap();
    let closed = 2.0 * h / (2.0 + h);
    assert!((v - closed).abs() < 1e-10, "{v} vs {closed}");
    // The same program restricted to the two-point support.
    let mut p = Problem::new(OptimizationDirection::Maximize);
    let f0 = p.add_var(1.0, (-1.0, 1.0));
    let f1 = p.add_var(-1.0, (-1.0, 1.0));
    let a0 = p.add_var(0.0, (0.0, 1.0));
    let a1 = p.add_var(0.0, (0.0, 1.0));
    for (fv, s) in [(f0, 1.0), (f0, -1.0), (f1, 1.0), (f1, -1.0)] {
        p.add_constraint([(fv, s), (a0, -1.0)], ComparisonOp::Le, 0.0);
    }
    for s in [1.0, -1.0] {
        p.add_constraint([(f1, s / h), (f0, -s / h), (a1, -1.0)], ComparisonOp::Le, 0.0);
    }
    p.add_constraint([(a0, 1.0), (a1, 1.0)], ComparisonOp::Le, 1.0);
    let two_point = p.solve().unwrap().objective();
    assert!((v - two_point).abs() < 1e-10);
}

#[test]
fn order_zero_is_total_variation_by_sign_enumeration() {
    let g = Grid64::new(0.0, 1.0, 12).unwrap();
    let mut state = 7u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64)
    };
    for _ in 0..10 {
        let mu = prob_from(g, &(0..12).map(|_| next()).collect::<Vec<_>>());
        let eta = prob_from(g, &(0..12).map(|_| next()).collect::<Vec<_>>());
        let d: Vec<f64> = mu.weights().iter().zip(eta.weights()).map(|(a, b)| a - b).collect();
        let brute = (0u32..1 << 12)
            .map(|mask| {
                (0..12)
                    .map(|i| if mask >> i & 1 == 1 { d[i] } else { -d[i] })
                    .sum::<f64>()
            })
            .fold(f64::MIN, f64::max);
        let v = dual_norm(&mu, &eta, 0).unwrap();
        assert!((v - brute).abs() < 1e-14);
        assert!(v <= 2.0);
    }
}

#[test]
fn interior_point_matches_simplex_oracle() {
    let mut state = 99u64;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    };
    for (n, len) in [(12usize, 1.0), (20, 4.0), (40, 10.0), (33, 0.5)] {
        let g = Grid64::new(0.0, len, n).unwrap();
        for k in 1..=2u8 {
            for _ in 0..4 {
                let w: Vec<f64> = (0..n).map(|_| next()).collect();
                let mu = signed(g, w);
                let zero = GridMeasure::zeros(g);
                let v = dual_norm(&mu, &zero, k).unwrap();
                let o = lp_oracle(mu.weights(), g.spacing(), k as usize);
                assert!((v - o).abs() < 1e-9 * (1.0 + o), "n={n} k={k}: {v} vs {o}");
            }
        }
    }
}

#[test]
fn interior_point_on_smooth_differences() {
    let g = Grid64::new(-5.0, 5.0, 512).unwrap();
    let a = GridMeasure::gaussian(g, 0.0, 0.5).unwrap();
    let b = GridMeasure::gaussian(g, 0.05, 0.5).unwrap();
    let v2 = dual_norm(&a, &b, 2).unwrap();
    let v1 = dual_norm(&a, &b, 1).unwrap();
    let v0 = dual_norm(&a, &b, 0).unwrap();
    let b1 = dual_norm_upper_bound(&a, &b, 1).unwrap();
    let b2 = dual_norm_upper_bound(&a, &b, 2).unwrap();
    assert!(v2 <= v1 && v1 <= v0, "{v2} {v1} {v0}");
    assert!(v1 <= b1 * (1.0 + 1e-9) && v2 <= b2 * (1.0 + 1e-9), "{v1} {b1} {v2} {b2}");
    // The second-flux decomposition is nearly tight for a small smooth shift.
    assert!(b2 < 3.0 * v2, "{b2} vs {v2}");
    assert!(v1 > 0.01 && v1 < 0.05);
}

#[test]
fn max_dual_norm_matches_exhaustive_maximum() {
    let g = Grid64::new(-3.0, 3.0, 64).unwrap();
    let a: Vec<_> = (0..12)
        .map(|j| GridMeasure::gaussian(g, 0.02 * j as f64, 0.6).unwrap())
        .collect();
    let b: Vec<_> = (0..12)
        .map(|j| GridMeasure::gaussian(g, -0.01 * (j % 5) as f64, 0.6 + 0.01 * j as f64).unwrap())
        .collect();
    let (best, at) = max_dual_norm(&a, &b, 2).unwrap();
    let all: Vec<f64> = a.iter().zip(&b).map(|(x, y)| dual_norm(x, y, 2).unwrap()).collect();
    let expected = all.iter().cloned().fold(0.0, f64::max);
    assert_eq!(best, expected);
    assert_eq!(all[at], expected);
}

#[test]
fn two_dimensional_grids_support_order_zero_only() {
    let g = Grid64::new_2d(0.0, 1.0, 8).unwrap();
    let mut w = vec![0.0; 64];
    w[3] = 1.0;
    let a = signed(g, w);
    let b = GridMeasure::zeros(g);
    assert_eq!(dual_norm(&a, &b, 0).unwrap(), 1.0);
    assert!(matches!(dual_norm(&a, &b, 1), Err(nlmarkov::Error::Unsupported(_))));
    let f = TestFunction::new(g, (0..64).map(|i| (i % 8) as f64).collect(), 1).unwrap();
    let n1 = ck_norm(&f, 1).unwrap();
    assert!((n1 - (7.0 + 8.0)).abs() < 1e-12);
}

#[test]
fn csv_round_trip() {
    let g = Grid64::new(-2.0, 2.0, 16).unwrap();
    let mu = GridMeasure::gaussian(g, 0.1, 0.7).unwrap();
    let text = mu.to_csv();
    assert!(text.starts_with("node_coordinate,weight\n"));
    let back = GridMeasure::parse_csv(g, text.as_bytes()).unwrap();
    assert_eq!(back, mu);
}

#[test]
fn f32_measures_work() {
    let g = Grid::<f32>::new(-3.0, 3.0, 64).unwrap();
    let a = GridMeasure::gaussian(g, 0.0, 1.0).unwrap();
    let b = GridMeasure::gaussian(g, 0.1, 1.0).unwrap();
    assert!((a.mass() - 1.0).abs() < 1e-5);
    let v: f32 = dual_norm(&a, &b, 1).unwrap();
    assert!(v > 0.0 && v < 0.2);
}

fn measure_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum::<f64>() + 1e-3;
        v.into_iter().map(|x| (x + 1e-3 / 24.0) / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pair_is_bilinear(
        f in prop::collection::vec(-2.0f64..2.0, 24),
        g in prop::collection::vec(-2.0f64..2.0, 24),
        w in prop::collection::vec(-1.0f64..1.0, 24),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let grid = Grid64::new(0.0, 1.0, 24).unwrap();
        let tf = TestFunction::new(grid, f, 0).unwrap();
        let tg = TestFunction::new(grid, g, 0).unwrap();
        let mu = signed(grid, w);
        let lhs = pair(&tf.combine(alpha, &tg, beta).unwrap(), &mu).unwrap();
        let rhs = alpha * pair(&tf, &mu).unwrap() + beta * pair(&tg, &mu).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())) * 10.0);
    }

    #[test]
    fn dual_norm_is_a_metric(
        a in measure_strategy(24),
        b in measure_strategy(24),
        c in measure_strategy(24),
        k in 0u8..=2,
    ) {
        let g = Grid64::new(-1.0, 1.0, 24).unwrap();
        let (a, b, c) = (signed(g, a), signed(g, b), signed(g, c));
        let ab = dual_norm(&a, &b, k).unwrap();
        let ba = dual_norm(&b, &a, k).unwrap();
        let bc = dual_norm(&b, &c, k).unwrap();
        let ac = dual_norm(&a, &c, k).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-10);
        prop_assert!(ab > 0.0);
        prop_assert_eq!(dual_norm(&a, &a, k).unwrap(), 0.0);
    }

    #[test]
    fn dual_norm_is_monotone_in_order(a in measure_strategy(32), b in measure_strategy(32)) {
        let g = Grid64::new(0.0, 2.0, 32).unwrap();
        let (a, b) = (signed(g, a), signed(g, b));
        let v0 = dual_norm(&a, &b, 0).unwrap();
        let v1 = dual_norm(&a, &b, 1).unwrap();
        let v2 = dual_norm(&a, &b, 2).unwrap();
        prop_assert!(v2 <= v1 + 1e-12 && v1 <= v0 + 1e-12);
    }

    #[test]
    fn duality_inequality_for_smooth_functions(
        a in measure_strategy(256),
        b in measure_strategy(256),
        coef in prop::collection::vec(-1.0f64..1.0, 4),
        k in 0u8..=2,
    ) {
        let g = Grid64::new(-5.0, 5.0, 256).unwrap();
        let (a, b) = (signed(g, a), signed(g, b));
        let f = TestFunction::from_fn(g, 2, |x| {
            coef[0] + coef[1] * (0.7 * x).sin() + coef[2] * (1.3 * x).cos() + coef[3] * (-0.2 * x * x).exp()
        }).unwrap();
        let lhs = pair(&f, &a.sub(&b).unwrap()).unwrap().abs();
        let rhs = ck_norm(&f, k).unwrap() * dual_norm(&a, &b, k).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-2) + 1e-12, "{} > {}", lhs, rhs);
    }

    #[test]
    fn decomposition_bound_dominates_the_lp(
        a in measure_strategy(48),
        b in measure_strategy(48),
        k in 0u8..=2,
    ) {
        let g = Grid64::new(-2.0, 2.0, 48).unwrap();
        let (a, b) = (signed(g, a), signed(g, b));
        let v = dual_norm(&a, &b, k).unwrap();
        let bound = dual_norm_upper_bound(&a, &b, k).unwrap();
        prop_assert!(v <= bound * (1.0 + 1e-9) + 1e-15, "{} > {}", v, bound);
    }
}
