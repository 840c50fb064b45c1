//! Ground truth for small instances and empirical checks of the drift
//! arguments behind the run-time bounds.

pub mod approx;
pub mod drift;
pub mod oracle;

pub use approx::{approximation_threshold, time_to_approximation};
pub use drift::{
    drift_constant_check, estimate_drift, exp_omega_drift_bound, potential_exp_omega,
    potential_rls, DriftReport, DriftSnapshot, PotentialSpec, RlsPotentialConstants,
};
pub use oracle::{exact_hitting_time, ChainAlgorithm, ChainSpec, HittingTimes};
