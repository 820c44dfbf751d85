//! Nonlinear semigroup `T_t μ` from the kinetic equation `d/dt (g, μ_t) = (A[μ_t] g, μ_t)`.

mod probes;
mod solver;

pub use probes::{
    lipschitz_probe, semigroup_check, stability_compare, LipschitzReport, LipschitzRow, SemigroupReport,
    SemigroupRow, StabilityReport,
};
pub use solver::{
    solve_kinetic, solve_kinetic_on, EngineChoice, InitialGuess, KineticOptions, KineticSolution, WindowLog,
};
pub(crate) use solver::build_engine;
