//! Exact expected hitting times of the optimum for tiny instances.
//!
//! Fitness depends on a search point only through its distance vector
//! `d_i = |a_i - x_i|`, so both unit-step algorithms are Markov chains on
//! `N^n`. Selection never increases `sum(d)`, which makes the L1 ball
//! `{d : sum(d) <= D}` closed and the transition matrix block lower
//! triangular by level `sum(d)`. Each level is solved densely, bottom-up.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_STATES: usize = 1_000_000;
pub const MAX_DIM: usize = 6;
const MAX_LEVEL_SIZE: usize = 4096;

/// Algorithms with an exact finite chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainAlgorithm {
    /// (1+1) EA with the `±1` operator.
    EaPm1,
    /// RLS with velocity frozen at 1.
    RlsFixedV1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    pub n: usize,
    /// Bound `D` on `sum(d)`; every start with `|start|_1 <= D` is covered.
    pub max_distance: u32,
    pub algorithm: ChainAlgorithm,
}

impl ChainSpec {
    pub fn new(n: usize, max_distance: u32, algorithm: ChainAlgorithm) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::invalid("n", format!("exact chains support 1 <= n <= {MAX_DIM}")));
        }
        let spec = Self {
            n,
            max_distance,
            algorithm,
        };
        let states = spec.state_count();
        if states > MAX_STATES {
            return Err(Error::StateSpaceTooLarge {
                states,
                limit: MAX_STATES,
            });
        }
        Ok(spec)
    }

    /// `C(D + n, n)`, saturating.
    pub fn state_count(&self) -> usize {
        let d = self.max_distance as u128;
        let mut c: u128 = 1;
        for k in 1..=self.n as u128 {
            c = c * (d + k) / k;
            if c > usize::MAX as u128 {
                return usize::MAX;
            }
        }
        c as usize
    }
}

/// Transition row of the chain at distance vector `d`, self-loop included.
pub fn transition_row(spec: &ChainSpec, d: &[u32]) -> Vec<(Vec<u32>, f64)> {
    let n = spec.n;
    let total: u32 = d.iter().sum();
    let mut row: HashMap<Vec<u32>, f64> = HashMap::new();
    if total == 0 {
        row.insert(d.to_vec(), 1.0);
        return row.into_iter().collect();
    }
    let nf = n as f64;
    match spec.algorithm {
        ChainAlgorithm::EaPm1 => {
            // Per coordinate: (change in distance, probability).
            let outcomes: Vec<Vec<(i64, f64)>> = d
                .iter()
                .map(|&di| {
                    let mut o = Vec::with_capacity(3);
                    if n > 1 {
                        o.push((0, 1.0 - 1.0 / nf));
                    }
                    if di > 0 {
                        o.push((-1, 0.5 / nf));
                        o.push((1, 0.5 / nf));
                    } else {
                        o.push((1, 1.0 / nf));
                    }
                    o
                })
                .collect();
            let mut choice = vec![0usize; n];
            loop {
                let mut p = 1.0;
                let mut next = Vec::with_capacity(n);
                for (i, &c) in choice.iter().enumerate() {
                    let (delta, q) = outcomes[i][c];
                    p *= q;
                    next.push((d[i] as i64 + delta) as u32);
                }
                let next_total: u32 = next.iter().sum();
                let dest = if next_total <= total { next } else { d.to_vec() };
                *row.entry(dest).or_insert(0.0) += p;

                // Odometer over the product of outcome lists.
                let mut k = 0;
                while k < n {
                    choice[k] += 1;
                    if choice[k] < outcomes[k].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        ChainAlgorithm::RlsFixedV1 => {
            for (i, &di) in d.iter().enumerate() {
                if di > 0 {
                    let mut next = d.to_vec();
                    next[i] -= 1;
                    *row.entry(next).or_insert(0.0) += 0.5 / nf;
                    *row.entry(d.to_vec()).or_insert(0.0) += 0.5 / nf;
                } else {
                    *row.entry(d.to_vec()).or_insert(0.0) += 1.0 / nf;
                }
            }
        }
    }
    let mut row: Vec<_> = row.into_iter().collect();
    row.sort_by(|x, y| x.0.cmp(&y.0));
    row
}

/// All `d` with `sum(d) == level`, in lexicographic order.
fn level_states(n: usize, level: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(n, remaining - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, level, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Expected hitting times of `0^n` for every state of the chain.
#[derive(Debug, Clone)]
pub struct HittingTimes {
    spec: ChainSpec,
    times: HashMap<Vec<u32>, f64>,
}

impl HittingTimes {
    pub fn solve(spec: ChainSpec) -> Result<Self> {
        let mut times: HashMap<Vec<u32>, f64> = HashMap::new();
        times.insert(vec![0; spec.n], 0.0);
        for level in 1..=spec.max_distance {
            let states = level_states(spec.n, level);
            let m = states.len();
            if m > MAX_LEVEL_SIZE {
                return Err(Error::StateSpaceTooLarge {
                    states: m,
                    limit: MAX_LEVEL_SIZE,
                });
            }
            let index: HashMap<&[u32], usize> =
                states.iter().enumerate().map(|(k, s)| (s.as_slice(), k)).collect();
            let mut matrix = DMatrix::<f64>::identity(m, m);
            let mut rhs = DVector::<f64>::from_element(m, 1.0);
            for (row_idx, state) in states.iter().enumerate() {
                for (dest, p) in transition_row(&spec, state) {
                    if let Some(&col) = index.get(dest.as_slice()) {
                        matrix[(row_idx, col)] -= p;
                    } else {
                        let lower = times.get(&dest).ok_or_else(|| {
                            Error::SingularSystem(format!(
                                "transition from {state:?} leaves the state space to {dest:?}"
                            ))
                        })?;
                        rhs[row_idx] += p * lower;
                    }
                }
            }
            let solution = matrix.lu().solve(&rhs).ok_or_else(|| {
                Error::SingularSystem(format!("level {level} has no route to the optimum"))
            })?;
            for (state, t) in states.into_iter().zip(solution.iter()) {
                if !t.is_finite() || *t < 0.0 {
                    return Err(Error::SingularSystem(format!(
                        "non-physical hitting time {t} at {state:?}"
                    )));
                }
                times.insert(state, *t);
            }
        }
        Ok(Self { spec, times })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn get(&self, start: &[u32]) -> Result<f64> {
        if start.len() != self.spec.n {
            return Err(Error::DimensionMismatch {
                expected: self.spec.n,
                actual: start.len(),
            });
        }
        self.times.get(start).copied().ok_or_else(|| {
            Error::invalid(
                "start",
                format!(
                    "{start:?} exceeds the distance bound {}",
                    self.spec.max_distance
                ),
            )
        })
    }
}

/// Expected number of evaluations to reach distance `0^n` from `start`.
pub fn exact_hitting_time(algorithm: ChainAlgorithm, start: &[u32]) -> Result<f64> {
    let total: u32 = start.iter().sum();
    let spec = ChainSpec::new(start.len(), total, algorithm)?;
    HittingTimes::solve(spec)?.get(start)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        for algorithm in [ChainAlgorithm::EaPm1, ChainAlgorithm::RlsFixedV1] {
            for n in 1..=3 {
                let spec = ChainSpec::new(n, 6, algorithm).unwrap();
                for level in 0..=6 {
                    for d in level_states(n, level) {
                        let row = transition_row(&spec, &d);
                        let sum: f64 = row.iter().map(|(_, p)| p).sum();
                        assert!((sum - 1.0).abs() <= 1e-12, "{algorithm:?} {d:?} {sum}");
                        assert!(row.iter().all(|(s, _)| s.iter().sum::<u32>() <= level));
                    }
                }
            }
        }
    }

    #[test]
    fn one_dimensional_ea_is_twice_the_distance() {
        for d in 1..=20u32 {
            let t = exact_hitting_time(ChainAlgorithm::EaPm1, &[d]).unwrap();
            assert!((t - 2.0 * d as f64).abs() < 1e-9, "d {d}: {t}");
        }
        assert_eq!(exact_hitting_time(ChainAlgorithm::EaPm1, &[0, 0]).unwrap(), 0.0);
    }

    /// For fixed-step RLS each coordinate is an independent geometric
    /// countdown, so E[T] has the coupon-style closed form for n = 1.
    #[test]
    fn fixed_step_rls_one_dimension() {
        let t = exact_hitting_time(ChainAlgorithm::RlsFixedV1, &[7]).unwrap();
        assert!((t - 14.0).abs() < 1e-9);
    }

    /// Values from an exact rational solve of the n = 2, D = 2 system,
    /// enumerating all 3^n mutation outcomes independently of this module.
    /// Sanity check for (1,0): only "first coordinate -1, second untouched"
    /// reaches the optimum, with probability 1/2 * 1/2 * 1/2 = 1/8, and the
    /// only other accepted move is the symmetric swap to (0,1), so E = 8.
    #[test]
    fn two_dimensional_exact_values() {
        let table = HittingTimes::solve(ChainSpec::new(2, 2, ChainAlgorithm::EaPm1).unwrap()).unwrap();
        assert!((table.get(&[1, 0]).unwrap() - 8.0).abs() < 1e-9);
        assert!((table.get(&[0, 1]).unwrap() - 8.0).abs() < 1e-9);
        assert!((table.get(&[1, 1]).unwrap() - 32.0 / 3.0).abs() < 1e-9);
        assert!((table.get(&[2, 0]).unwrap() - 40.0 / 3.0).abs() < 1e-9);
        assert!((table.get(&[0, 2]).unwrap() - 40.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_and_guards() {
        assert!(ChainSpec::new(0, 3, ChainAlgorithm::EaPm1).is_err());
        assert!(matches!(
            ChainSpec::new(6, 200, ChainAlgorithm::EaPm1),
            Err(Error::StateSpaceTooLarge { .. })
        ));
        let table = HittingTimes::solve(ChainSpec::new(2, 3, ChainAlgorithm::EaPm1).unwrap()).unwrap();
        assert!(table.get(&[3, 1]).is_err());
        assert!(table.get(&[1]).is_err());
        assert_eq!(ChainSpec::new(2, 10, ChainAlgorithm::EaPm1).unwrap().state_count(), 66);
    }
}
