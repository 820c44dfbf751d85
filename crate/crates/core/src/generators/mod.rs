//! Measure-dependent generator families `A[μ]` and their derivatives.

pub(crate) mod assembly;
mod checks;
mod coefficient;
mod family;
mod levy;
mod order_one;
mod profile;

pub use checks::{
    estimate_levy_lipschitz, generator_distance, validate_order_one_conditions, validate_order_one_conditions_with_cut,
    LipschitzEstimate, OrderOneReport,
};
pub use coefficient::{Coefficient, Interaction};
pub use family::{assemble_matrix, dual_representation, gateaux, levy_gateaux, Family, GeneratorMatrix, RankOperator};
pub use levy::{
    levy_symbol, JumpMeasure, LevyCoefficients, LevyFamily, LevyJumpTerm, LevyScalars, StableTerm, SymbolBasis,
};
pub use order_one::{DriftTerm, JumpTerm, LocalCoefficients, OrderOneFamily};
pub use profile::{Profile, TimeProfile, Transform};
