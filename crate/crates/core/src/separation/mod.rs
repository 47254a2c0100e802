//! Samplers and Monte Carlo verification of separability bounds.

mod bounds;
mod estimate;
mod sampler;

pub use bounds::{
    dichotomy_bound, min_dimension, remark2_bounds, theorem1_bound, theorem3_bounds, BoundParams,
    Theorem3Bounds,
};
pub use estimate::{
    check_dichotomy, dichotomy_holds, estimate_remark2, estimate_theorem1, estimate_theorem2,
    Remark2Report, SeparabilityReport,
};
pub use sampler::{sample_shifted_ball, sample_unit_ball};
