//! Randomized search heuristics on the integer lattice `Z^n`, minimizing
//! `f_a(x) = |a - x|_1`.
//!
//! - [`lattice`]: target vectors, search points, fitness and norms.
//! - [`sampling`]: the `±1` step and the heavy-tailed power-of-two step.
//! - [`algorithms`]: the (1+1) EA and RLS with self-adjusting velocities.
//! - [`analysis`]: exact hitting times for small chains, drift estimation
//!   against potential functions, approximation times.
//! - [`harness`]: experiment grids, CSV persistence and box-plot summaries.

pub mod algorithms;
pub mod analysis;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod rng;
pub mod sampling;

pub use algorithms::{
    apply_box_clamp, run_to_optimum, run_until, Algorithm, EaState, Iteration, OnePlusOneEa,
    Optimizer, RlsParams, RlsState, RunBudget, RunOutcome, SelfAdjustingRls, StepOperator,
};
pub use error::{Error, Result};
pub use lattice::{eval_fitness, norm_hamming, norm_l1, norm_linf, Fitness, SearchPoint, TargetVector};
pub use sampling::{compute_c_epsilon, pm1_step, Exponent, HeavyTailedParams, HeavyTailedSampler};
