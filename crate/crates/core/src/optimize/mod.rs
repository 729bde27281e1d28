//! Drive and shaper design for target gates.

mod checks;
pub mod engine;
pub mod lbfgs;
mod problem;
mod search;
mod single;

pub use checks::{
    agrees_to_digits, parallel_gate_metrics, passband_truncation_check, scaling_problem, scaling_study, ScalingOptions,
    ScalingRow,
};
pub use problem::{DesignProblem, Merit, ParameterVector, StartDistribution, PENALTY_WEIGHT};
pub use search::{
    aliasing_check, evaluate_parameters, objective, optimize, optimize_with, restart_rng, AliasingReport, DesignResult,
    ProblemRecord, RestartSummary,
};
pub use single::{balanced_success, coefficient_powers, single_eom_search, SingleEomProblem, SingleEomResult};
