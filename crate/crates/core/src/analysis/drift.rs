//! Potential functions from the run-time proofs and Monte-Carlo estimates of
//! their one-step drift.

use std::f64::consts::E;

use rand::Rng;

use crate::algorithms::{Algorithm, EaState, Optimizer, RlsState};
use crate::error::{Error, Result};
use crate::lattice::{component_distance, SearchPoint, TargetVector};

pub const MIN_DRIFT_SAMPLES: usize = 1_000;

/// `sum_i (omega^{d_i} - 1)` with `d_i = |a_i - x_i|`.
pub fn potential_exp_omega(a: &TargetVector, x: &SearchPoint, omega: f64) -> Result<f64> {
    if !(omega > 1.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", format!("must be > 1, got {omega}")));
    }
    if a.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: x.dim(),
        });
    }
    let mut total = 0.0;
    for (&ai, &xi) in a.components().iter().zip(x.components()) {
        let d = component_distance(ai, xi);
        // powi takes i32; larger exponents overflow for any omega > 1 worth using.
        let term = if d > i32::MAX as u64 {
            f64::INFINITY
        } else {
            omega.powi(d as i32) - 1.0
        };
        total += term;
    }
    if !total.is_finite() {
        return Err(Error::Overflow(format!(
            "exp-omega potential with omega = {omega} exceeds f64 range"
        )));
    }
    Ok(total)
}

/// `omega - 1 - e (omega - 1)^2`; positive exactly where the multiplicative
/// drift argument for the `±1` EA goes through.
pub fn drift_constant_check(omega: f64) -> f64 {
    let w = omega - 1.0;
    w - E * w * w
}

/// Lower bound `c / (2 omega n) * g` on the drift of the exp-omega potential
/// under the `±1` EA, with `c = drift_constant_check(omega) / e`.
pub fn exp_omega_drift_bound(omega: f64, n: usize, potential: f64) -> f64 {
    let c = drift_constant_check(omega) / E;
    c / (2.0 * omega * n as f64) * potential
}

/// Constants of the velocity-aware RLS potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlsPotentialConstants {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    pub p: f64,
}

impl RlsPotentialConstants {
    /// Names of the violated conditions; empty when the constants are admissible.
    pub fn violations(&self) -> Vec<&'static str> {
        let Self { alpha, beta, c, p } = *self;
        let checks: [(&'static str, bool); 9] = [
            ("1 < alpha <= 2", 1.0 < alpha && alpha <= 2.0),
            ("1/2 < beta <= 0.9", 0.5 < beta && beta <= 0.9),
            ("2 alpha beta - beta - alpha > 0", 2.0 * alpha * beta - beta - alpha > 0.0),
            ("alpha + beta > 2", alpha + beta > 2.0),
            ("alpha^2 beta > 1", alpha * alpha * beta > 1.0),
            (
                "8 alpha beta c + 2p + 4c/beta <= 1/16",
                8.0 * alpha * beta * c + 2.0 * p + 4.0 * c / beta <= 1.0 / 16.0,
            ),
            (
                "p > 8c((alpha + beta)/2 - 1)",
                p > 8.0 * c * ((alpha + beta) / 2.0 - 1.0),
            ),
            ("p > 4(alpha - 1)c", p > 4.0 * (alpha - 1.0) * c),
            ("4(alpha - 1)c > 0", 4.0 * (alpha - 1.0) * c > 0.0),
        ];
        checks
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| name)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid("rls_cp", format!("violated: {}", v.join("; "))))
        }
    }

    /// Per-coordinate potential `g_i(d, v)`.
    pub fn component(&self, d: u64, v: f64) -> f64 {
        if d == 0 {
            return 0.0;
        }
        let d = d as f64;
        let mut g = d + self.c * d * (2.0 * v / d).max(d / (2.0 * v));
        if v > 2.0 * self.beta * d {
            g += self.p * d;
        }
        g
    }
}

/// Velocity-aware potential `sum_i g_i(d_i, v_i)`.
pub fn potential_rls(
    constants: &RlsPotentialConstants,
    a: &TargetVector,
    x: &SearchPoint,
    velocities: &[f64],
) -> Result<f64> {
    if a.dim() != x.dim() || velocities.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: velocities.len().min(x.dim()),
        });
    }
    Ok(a.components()
        .iter()
        .zip(x.components())
        .zip(velocities)
        .map(|((&ai, &xi), &v)| constants.component(component_distance(ai, xi), v))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    ExpOmega { omega: f64 },
    RlsCp(RlsPotentialConstants),
}

impl PotentialSpec {
    pub fn exp_omega(omega: f64) -> Result<Self> {
        let spec = PotentialSpec::ExpOmega { omega };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rls_cp(alpha: f64, beta: f64, c: f64, p: f64) -> Result<Self> {
        let spec = PotentialSpec::RlsCp(RlsPotentialConstants { alpha, beta, c, p });
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::ExpOmega { omega } if !(*omega > 1.0 && omega.is_finite()) => {
                Err(Error::invalid("omega", format!("must be > 1, got {omega}")))
            }
            PotentialSpec::ExpOmega { .. } => Ok(()),
            PotentialSpec::RlsCp(k) => k.validate(),
        }
    }

    fn evaluate(&self, a: &TargetVector, x: &SearchPoint, velocities: Option<&[f64]>) -> Result<f64> {
        match self {
            PotentialSpec::ExpOmega { omega } => potential_exp_omega(a, x, *omega),
            PotentialSpec::RlsCp(k) => {
                let v = velocities.ok_or_else(|| {
                    Error::invalid("velocities", "the RLS potential needs a velocity vector")
                })?;
                potential_rls(k, a, x, v)
            }
        }
    }
}

/// A state to estimate drift from.
#[derive(Debug, Clone)]
pub struct DriftSnapshot {
    pub target: TargetVector,
    pub point: SearchPoint,
    /// RLS velocities; all-one when absent.
    pub velocities: Option<Vec<f64>>,
}

impl DriftSnapshot {
    /// Snapshot at `x = 0` with target `a = d`, i.e. distance vector `d`.
    /// Returns `None` for the all-zero distance vector (no target exists).
    pub fn from_distances(d: &[i64]) -> Option<Result<Self>> {
        if d.iter().all(|&v| v == 0) {
            return None;
        }
        Some(TargetVector::new(d.to_vec()).map(|target| Self {
            point: SearchPoint::origin(&target),
            target,
            velocities: None,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub potential: f64,
    /// Mean of `g(before) - g(after)`.
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Theoretical lower bound on the drift, when one is known for the
    /// algorithm/potential pair.
    pub lower_bound: Option<f64>,
}

impl DriftReport {
    /// `mean >= lower_bound - k * std_error`; vacuous without a bound.
    pub fn satisfies_bound(&self, k: f64) -> bool {
        self.lower_bound
            .is_none_or(|b| self.mean >= b - k * self.std_error)
    }
}

/// Monte-Carlo estimate of the expected one-step potential decrease from the
/// snapshot. At the optimum the drift is exactly zero and nothing is sampled.
pub fn estimate_drift<R: Rng + ?Sized>(
    snapshot: &DriftSnapshot,
    algorithm: &Algorithm,
    potential: &PotentialSpec,
    samples: usize,
    rng: &mut R,
) -> Result<DriftReport> {
    potential.validate()?;
    if samples < MIN_DRIFT_SAMPLES {
        return Err(Error::invalid(
            "samples",
            format!("need at least {MIN_DRIFT_SAMPLES}, got {samples}"),
        ));
    }
    let a = &snapshot.target;
    let n = a.dim();
    let velocities = snapshot
        .velocities
        .clone()
        .unwrap_or_else(|| vec![1.0; n]);
    let before = potential.evaluate(a, &snapshot.point, Some(&velocities))?;

    let lower_bound = match (algorithm, potential) {
        (Algorithm::Ea(ea), PotentialSpec::ExpOmega { omega })
            if matches!(ea.operator(), crate::algorithms::StepOperator::PlusMinusOne) =>
        {
            Some(exp_omega_drift_bound(*omega, n, before))
        }
        (Algorithm::Rls(_), PotentialSpec::RlsCp(_)) => Some(0.0),
        _ => None,
    };

    if snapshot.point.fitness().is_optimal() {
        return Ok(DriftReport {
            potential: before,
            mean: 0.0,
            std_error: 0.0,
            samples: 0,
            lower_bound,
        });
    }

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let delta = match algorithm {
            Algorithm::Ea(ea) => {
                let mut s = EaState::new(snapshot.point.clone());
                ea.iterate(&mut s, a, rng);
                before - potential.evaluate(a, &s.point, Some(&velocities))?
            }
            Algorithm::Rls(rls) => {
                let mut s = RlsState::new(snapshot.point.clone(), velocities.clone())?;
                rls.iterate(&mut s, a, rng);
                before - potential.evaluate(a, &s.point, Some(&s.velocities))?
            }
        };
        sum += delta;
        sum_sq += delta * delta;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(DriftReport {
        potential: before,
        mean,
        std_error: (var / m).sqrt(),
        samples,
        lower_bound,
    })
}
