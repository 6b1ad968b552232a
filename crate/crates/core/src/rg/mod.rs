//! Renormalization-group machinery: the linear RG map, the Picard solver for
//! one renormalized block, the nonlinear flow and the explicit constants.

pub mod constants;
pub mod flow;
pub mod linear;
pub mod picard;

pub use constants::{contraction_constants, theory_constants, TheoryConstants, EPSILON_STEPS};
pub use flow::{rg_step, run_flow, FlowReport, FlowRow, FlowRun, RgState};
pub use linear::{
    contraction_study, evolved_profile, linear_flow, linear_rg_apply, mean_zero_family, profile_time,
    scaling_exponent, ContractionRow, ContractionStudy, LinearStep,
};
pub use picard::{Guards, PicardOptions, Renormalized, Solution, StepReport};
