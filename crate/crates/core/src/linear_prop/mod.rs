//! Linear propagators of frozen-coefficient generators and their T-products.

mod compare;
mod frozen;
pub(crate) mod matrix;
mod partition;
mod propagator;
pub(crate) mod spectral;
mod tproduct;

pub use compare::{compare_propagators, ComparisonReport};
pub use frozen::{Freeze, StepInput};
pub use partition::Partition;
pub use propagator::{EngineKind, Propagator};
pub use tproduct::{report_csv, t_product, RefinementRow, TProduct, MAX_REFINEMENTS};
