//! Time until the search point is within a given fraction of the initial
//! distance.

use rand::Rng;

use crate::algorithms::{Algorithm, RunBudget, RunOutcome};
use crate::error::{Error, Result};
use crate::lattice::TargetVector;

/// Largest integer fitness `f` with `f <= ratio * |a|_1`.
pub fn approximation_threshold(a: &TargetVector, ratio: f64) -> Result<u64> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid("ratio", format!("must be in (0, 1], got {ratio}")));
    }
    if ratio == 1.0 {
        return Ok(a.norm_l1());
    }
    Ok((ratio * a.norm_l1() as f64).floor() as u64)
}

/// Evaluations until `f(x) <= ratio * |a|_1`, starting from the origin.
pub fn time_to_approximation<R: Rng + ?Sized>(
    algorithm: &Algorithm,
    a: &TargetVector,
    ratio: f64,
    budget: &RunBudget,
    rng: &mut R,
) -> Result<RunOutcome> {
    let threshold = approximation_threshold(a, ratio)?;
    Ok(algorithm.run(a, budget, threshold, rng))
}
