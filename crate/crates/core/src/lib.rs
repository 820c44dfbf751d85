//! Nonlinear Markov semigroups on discretized probability measures.
//!
//! The crate builds propagators of time-dependent Lévy-type and order-one generators,
//! perturbs them through the mild (Duhamel) equation, solves nonlinear kinetic equations
//! `d/dt (g, μ_t) = (A[μ_t] g, μ_t)` by contraction over curves, and computes parameter
//! and initial-data sensitivities. Everything is generic over [`Real`] (`f32`/`f64`);
//! the `*64` aliases fix the scalar to `f64`.

pub mod error;
pub mod generators;
pub mod linalg;
pub mod linear_prop;
pub mod measures;
pub mod nonlinear;
pub mod oracles;
pub mod perturbation;
pub mod scalar;
pub mod sensitivity;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use measures::{Curve, Grid, GridMeasure, TestFunction};
pub use scalar::Real;

pub type Grid64 = Grid<f64>;
pub type GridMeasure64 = GridMeasure<f64>;
pub type TestFunction64 = TestFunction<f64>;
pub type Curve64 = Curve<f64>;
pub type DenseMatrix64 = DenseMatrix<f64>;
