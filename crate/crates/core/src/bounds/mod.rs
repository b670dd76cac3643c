//! Integration schedules, λ-power bookkeeping, the K-identity and low-order
//! ladder values.

pub mod exponent;
pub mod kidentity;
pub mod ladder;
pub mod schedule;

pub use exponent::{
    default_c_delta, exponent_report, exponent_report_with, kappa_limit, pointwise_bound, pointwise_bound_with,
    step_power, ExponentReport, IndexCounts, PointwiseBound,
};
pub use kidentity::{
    contour_integral, divided_difference_exp, divided_difference_exp_matrix, k_identity_check, simplex_integral,
    simplex_integral_nested, KIdentityOptions, KIdentityReport,
};
pub use ladder::{
    free_term_w, ladder_value, markov_no_collision, markov_one_collision, FreeTerm, LadderSetup, LadderValue, Observable,
};
pub use schedule::{schedule, Schedule, ScheduleViolation, Step, StepCase};
