//! Integer vectors, the L1-distance fitness family and the norms used to
//! state run-time bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance `|a - x|` between two integers, saturating at `u64::MAX`.
#[inline]
pub fn component_distance(a: i64, x: i64) -> u64 {
    // i64 differences always fit in u64 via unsigned_abs on the i128 widening.
    let d = (a as i128 - x as i128).unsigned_abs();
    u64::try_from(d).unwrap_or(u64::MAX)
}

/// Fitness value `f_a(x) = |a - x|_1`. Accumulation saturates at `u64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fitness(pub u64);

impl Fitness {
    pub const OPTIMAL: Fitness = Fitness(0);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_optimal(self) -> bool {
        self.0 == 0
    }

    pub fn is_saturated(self) -> bool {
        self.0 == u64::MAX
    }
}

impl std::fmt::Display for Fitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The optimum `a` of `f_a`. Norms are cached at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetVector {
    components: Vec<i64>,
    l1: u64,
    linf: u64,
    hamming: usize,
}

impl TargetVector {
    pub fn new(components: Vec<i64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if components.iter().all(|&c| c == 0) {
            return Err(Error::ZeroTarget);
        }
        let l1 = l1_norm(&components);
        let linf = components.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let hamming = components.iter().filter(|&&c| c != 0).count();
        Ok(Self {
            components,
            l1,
            linf,
            hamming,
        })
    }

    /// The all-`r` target of dimension `n`.
    pub fn all_r(n: usize, r: i64) -> Result<Self> {
        Self::new(vec![r; n])
    }

    pub fn components(&self) -> &[i64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm_l1(&self) -> u64 {
        self.l1
    }

    pub fn norm_linf(&self) -> u64 {
        self.linf
    }

    pub fn norm_hamming(&self) -> usize {
        self.hamming
    }
}

fn l1_norm(v: &[i64]) -> u64 {
    v.iter()
        .fold(0u64, |acc, c| acc.saturating_add(c.unsigned_abs()))
}

/// `|a|_1`, saturating.
pub fn norm_l1(a: &TargetVector) -> u64 {
    a.norm_l1()
}

/// `|a|_inf`.
pub fn norm_linf(a: &TargetVector) -> u64 {
    a.norm_linf()
}

/// Number of non-zero components of `a`.
pub fn norm_hamming(a: &TargetVector) -> usize {
    a.norm_hamming()
}

/// A point of the search space together with its cached fitness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPoint {
    components: Vec<i64>,
    fitness: Fitness,
}

impl SearchPoint {
    /// Builds a point and evaluates it against `a`.
    pub fn new(a: &TargetVector, components: Vec<i64>) -> Result<Self> {
        let fitness = eval_components(a, &components)?;
        Ok(Self {
            components,
            fitness,
        })
    }

    /// The all-zero starting point.
    pub fn origin(a: &TargetVector) -> Self {
        Self {
            components: vec![0; a.dim()],
            fitness: Fitness(a.norm_l1()),
        }
    }

    pub fn components(&self) -> &[i64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn fitness(&self) -> Fitness {
        self.fitness
    }

    /// Replaces the listed components and updates the cached fitness
    /// incrementally. The caller guarantees `fitness` is the value of the
    /// modified point.
    pub(crate) fn install(&mut self, changes: &[(usize, i64)], fitness: Fitness) {
        for &(i, value) in changes {
            self.components[i] = value;
        }
        self.fitness = fitness;
    }

    pub(crate) fn set_component(&mut self, i: usize, value: i64, fitness: Fitness) {
        self.components[i] = value;
        self.fitness = fitness;
    }
}

/// `f_a(x) = sum_i |a_i - x_i|`, saturating at `u64::MAX`.
pub fn eval_fitness(a: &TargetVector, x: &SearchPoint) -> Result<Fitness> {
    eval_components(a, x.components())
}

pub fn eval_components(a: &TargetVector, x: &[i64]) -> Result<Fitness> {
    if a.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: x.len(),
        });
    }
    let total = a
        .components()
        .iter()
        .zip(x)
        .fold(0u64, |acc, (&ai, &xi)| {
            acc.saturating_add(component_distance(ai, xi))
        });
    Ok(Fitness(total))
}

/// Fitness of `x` after replacing the listed components, computed from the
/// parent's fitness. Exact whenever the parent fitness is not saturated.
pub(crate) fn fitness_after(
    a: &TargetVector,
    x: &SearchPoint,
    changes: &[(usize, i64)],
) -> Fitness {
    let ac = a.components();
    let xc = x.components();
    let mut total = x.fitness().0 as i128;
    for &(i, value) in changes {
        total -= component_distance(ac[i], xc[i]) as i128;
        total += component_distance(ac[i], value) as i128;
    }
    Fitness(u64::try_from(total.max(0)).unwrap_or(u64::MAX))
}
