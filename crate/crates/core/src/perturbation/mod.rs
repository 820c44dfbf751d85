//! Bounded perturbations of a propagator through the mild (Duhamel) equation.

mod mild;
mod operator;

pub use mild::{series_tail_bound, PerturbedHandle, PicardOptions, PicardReport, PicardWindow, Quadrature};
pub use operator::Perturbation;
