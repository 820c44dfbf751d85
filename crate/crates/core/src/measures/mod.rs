//! Grids, discretized measures, test functions, curves and the dual-norm surrogates.

mod grid;
pub(crate) mod lp;
mod measure;
mod norms;

pub use grid::Grid;
pub use measure::{node_index, pair, Curve, GridMeasure, TestFunction, MASS_TOL, NEGATIVE_WEIGHT_TOL};
pub use norms::{ck_norm, dual_norm, dual_norm_upper_bound, max_dual_norm};
