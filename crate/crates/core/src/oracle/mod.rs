//! Derivative-free reference computations: grid solutions of the lower
//! level, sampled normal cones and coderivatives, and stability moduli.
//! They share no code with the exact machinery and serve as its test oracle.

mod grid;
mod sampling;
mod stability;

use thiserror::Error;

use crate::expr::EvalError;

pub use grid::{
    optimistic_response, phi0, solve_lower_grid, verify_optimistic_local, GridSpec, LowerSolution, OptimalityVerdict,
    Violator,
};
pub use sampling::{
    angular_hausdorff_deg, circle_directions, random_directions, sample_frechet_coderivative,
    sample_frechet_normal_cone, sample_limiting_normal_cone, ClassifiedDirection, CoderivativeSample, FrechetSample,
    MembershipSet, SampleBudget, SampleSet, SegmentUnion, BASE_POINTS_PER_DISTANCE,
};
pub use stability::{axis_samples, estimate_calmness, estimate_lipschitz_like, ModulusEstimate, SampledMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("dimension mismatch")]
    Dimension,
    #[error("grid bounds must be finite with lower ≤ upper, resolution ≥ 2, refinement ≥ 1")]
    BadGrid,
    #[error("no grid point lies in K with a finite lower-level value")]
    EmptyGrid,
    #[error("base point is not in the set")]
    NotInSet,
    #[error("only {found} set points found within radius {radius:e}")]
    TooFewSamples { radius: f64, found: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}
