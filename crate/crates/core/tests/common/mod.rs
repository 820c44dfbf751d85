#![allow(dead_code)]

use nlmarkov::generators::{Coefficient, JumpMeasure, OrderOneFamily, Profile, TimeProfile, Transform};
use nlmarkov::{Grid, GridMeasure, TestFunction};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_probability(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> GridMeasure<f64> {
    let w: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = w.iter().sum();
    GridMeasure::new(*grid, w.into_iter().map(|x| x / s).collect()).unwrap()
}

pub fn random_signed(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> GridMeasure<f64> {
    let w: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() - 0.5).collect();
    GridMeasure::new(*grid, w).unwrap()
}

pub fn random_function(grid: &Grid<f64>, rng: &mut ChaCha8Rng) -> TestFunction<f64> {
    let v: Vec<f64> = (0..grid.len()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    TestFunction::new(*grid, v, 0).unwrap()
}

/// Time- and measure-dependent order-one family with random smooth coefficients.
pub fn random_order_one(rng: &mut ChaCha8Rng) -> OrderOneFamily<f64> {
    let phi = Profile::Sin {
        amplitude: 1.0,
        frequency: rng.random_range(0.3..1.5),
        phase: rng.random_range(0.0..3.0),
    };
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
            Profile::Sin {
                amplitude: 1.0,
                frequency: rng.random_range(0.3..1.5),
                phase: rng.random_range(0.0..3.0),
            },
        )
        .with_jumps(
            Coefficient::constant(1.0).with_interaction(0, rng.random_range(0.0..0.5), Transform::Square),
            Profile::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: rng.random_range(0.5..2.0),
            },
            JumpMeasure::points(jumps).unwrap(),
        )
}
