//! Derivatives of the nonlinear evolution with respect to a parameter and to the initial data.

mod tangent;
mod validate;

pub use tangent::{initial_data_derivative, linearized_propagate, SensitivityRun};
pub use validate::{fd_validate, initial_alpha_derivative, FdReport, FdRow};
