//! Independent reference computations: dense ODE integration, particle systems, closed forms.

mod dense;
mod moments;
mod particles;

pub use dense::{dense_apply, dense_evolve, dense_step_matrices, dopri5, GeneratorSource, OdeOptions};
pub use moments::{moment_oracle, MomentOracle};
pub use particles::{histogram, particle_simulate, ParticleOptions, ParticleRun, MAX_RATE_STEP};
