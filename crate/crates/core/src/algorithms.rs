//! The (1+1) EA with a pluggable per-coordinate step operator and RLS with
//! self-adjusting per-coordinate velocities.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{fitness_after, Fitness, SearchPoint, TargetVector};
use crate::sampling::{pm1_step, HeavyTailedSampler};

/// Per-coordinate mutation used by the (1+1) EA.
#[derive(Debug, Clone)]
pub enum StepOperator {
    PlusMinusOne,
    HeavyTailed(Arc<HeavyTailedSampler>),
}

impl StepOperator {
    #[inline]
    pub fn apply<R: Rng + ?Sized>(&self, x: i64, rng: &mut R) -> i64 {
        match self {
            StepOperator::PlusMinusOne => pm1_step(x, rng),
            StepOperator::HeavyTailed(sampler) => sampler.heavy_tailed_step(x, rng),
        }
    }
}

/// Evaluation budget and the optional `[0, r]` box used by bounded experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunBudget {
    max_evaluations: u64,
    box_bound: Option<u64>,
}

impl RunBudget {
    pub fn new(max_evaluations: u64) -> Result<Self> {
        if max_evaluations == 0 {
            return Err(Error::invalid("max_evaluations", "budget must be >= 1"));
        }
        Ok(Self {
            max_evaluations,
            box_bound: None,
        })
    }

    pub fn with_box_bound(mut self, r: u64) -> Result<Self> {
        if r == 0 || r > i64::MAX as u64 {
            return Err(Error::invalid("box_bound", format!("must be in [1, {}]", i64::MAX)));
        }
        self.box_bound = Some(r);
        Ok(self)
    }

    pub fn max_evaluations(&self) -> u64 {
        self.max_evaluations
    }

    pub fn box_bound(&self) -> Option<u64> {
        self.box_bound
    }
}

#[inline]
fn clamp_component(v: i64, r: u64) -> i64 {
    v.clamp(0, r as i64)
}

/// Clamps every component into `[0, r]`.
pub fn apply_box_clamp(y: &[i64], r: u64) -> Vec<i64> {
    let r = r.min(i64::MAX as u64);
    y.iter().map(|&v| clamp_component(v, r)).collect()
}

/// What happened in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iteration {
    /// Number of coordinates the offspring differs in before selection.
    pub mutated: usize,
    pub accepted: bool,
    /// Offspring strictly better than the parent.
    pub improved: bool,
}

/// Fitness of the offspring and whether elitist selection installs it.
pub fn selection(a: &TargetVector, x: &SearchPoint, changes: &[(usize, i64)]) -> (Fitness, bool) {
    let f = fitness_after(a, x, changes);
    (f, f <= x.fitness())
}

/// State shared by both optimizers for the run loop.
pub trait SearchState {
    fn point(&self) -> &SearchPoint;
    fn evaluations(&self) -> u64;
}

pub trait Optimizer {
    type State: SearchState;

    /// Initial state at the origin.
    fn init(&self, a: &TargetVector) -> Self::State;

    /// One mutation and selection round; consumes one evaluation.
    fn iterate<R: Rng + ?Sized>(&self, state: &mut Self::State, a: &TargetVector, rng: &mut R)
        -> Iteration;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EaState {
    pub point: SearchPoint,
    pub evaluations: u64,
}

impl EaState {
    pub fn new(point: SearchPoint) -> Self {
        Self {
            point,
            evaluations: 0,
        }
    }
}

impl SearchState for EaState {
    fn point(&self) -> &SearchPoint {
        &self.point
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// (1+1) EA: every coordinate is mutated independently with probability `1/n`;
/// the offspring replaces the parent iff it is not worse.
#[derive(Debug, Clone)]
pub struct OnePlusOneEa {
    operator: StepOperator,
    box_bound: Option<u64>,
}

impl OnePlusOneEa {
    pub fn new(operator: StepOperator) -> Self {
        Self {
            operator,
            box_bound: None,
        }
    }

    pub fn with_box_bound(mut self, r: Option<u64>) -> Self {
        self.box_bound = r;
        self
    }

    pub fn operator(&self) -> &StepOperator {
        &self.operator
    }
}

impl Optimizer for OnePlusOneEa {
    type State = EaState;

    fn init(&self, a: &TargetVector) -> EaState {
        EaState::new(SearchPoint::origin(a))
    }

    fn iterate<R: Rng + ?Sized>(&self, state: &mut EaState, a: &TargetVector, rng: &mut R) -> Iteration {
        let n = a.dim();
        let p = 1.0 / n as f64;
        let mut changes: Vec<(usize, i64)> = Vec::new();
        for (i, &xi) in state.point.components().iter().enumerate() {
            if rng.random_bool(p) {
                let mut yi = self.operator.apply(xi, rng);
                if let Some(r) = self.box_bound {
                    yi = clamp_component(yi, r);
                }
                changes.push((i, yi));
            }
        }
        state.evaluations += 1;
        let (f, accepted) = selection(a, &state.point, &changes);
        let improved = f < state.point.fitness();
        if accepted {
            state.point.install(&changes, f);
        }
        Iteration {
            mutated: changes.len(),
            accepted,
            improved,
        }
    }
}

/// Velocity update constants of the self-adjusting RLS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlsParams {
    /// Growth factor after a strict improvement.
    pub alpha: f64,
    /// Shrink factor otherwise (floored at velocity 1).
    pub beta: f64,
}

impl RlsParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be >= 1, got {alpha}")));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must be in (0, 1], got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    /// RLS with velocity frozen at 1.
    pub fn fixed_step() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlsState {
    pub point: SearchPoint,
    pub velocities: Vec<f64>,
    pub evaluations: u64,
}

impl RlsState {
    pub fn new(point: SearchPoint, velocities: Vec<f64>) -> Result<Self> {
        if velocities.len() != point.dim() {
            return Err(Error::DimensionMismatch {
                expected: point.dim(),
                actual: velocities.len(),
            });
        }
        if let Some(v) = velocities.iter().find(|v| !(**v >= 1.0 && v.is_finite())) {
            return Err(Error::invalid("velocities", format!("must be >= 1, got {v}")));
        }
        Ok(Self {
            point,
            velocities,
            evaluations: 0,
        })
    }
}

impl SearchState for RlsState {
    fn point(&self) -> &SearchPoint {
        &self.point
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// RLS mutating one uniformly chosen coordinate by `±floor(v_i)`.
#[derive(Debug, Clone)]
pub struct SelfAdjustingRls {
    params: RlsParams,
    box_bound: Option<u64>,
}

impl SelfAdjustingRls {
    pub fn new(params: RlsParams) -> Self {
        Self {
            params,
            box_bound: None,
        }
    }

    pub fn with_box_bound(mut self, r: Option<u64>) -> Self {
        self.box_bound = r;
        self
    }

    pub fn params(&self) -> RlsParams {
        self.params
    }
}

impl Optimizer for SelfAdjustingRls {
    type State = RlsState;

    fn init(&self, a: &TargetVector) -> RlsState {
        RlsState {
            point: SearchPoint::origin(a),
            velocities: vec![1.0; a.dim()],
            evaluations: 0,
        }
    }

    fn iterate<R: Rng + ?Sized>(&self, state: &mut RlsState, a: &TargetVector, rng: &mut R) -> Iteration {
        let i = rng.random_range(0..a.dim());
        // Float-to-int casts saturate.
        let step = state.velocities[i].floor() as i64;
        let xi = state.point.components()[i];
        let mut yi = if rng.random_bool(0.5) {
            xi.saturating_sub(step)
        } else {
            xi.saturating_add(step)
        };
        if let Some(r) = self.box_bound {
            yi = clamp_component(yi, r);
        }
        state.evaluations += 1;
        let (f, accepted) = selection(a, &state.point, &[(i, yi)]);
        let improved = f < state.point.fitness();
        let v = &mut state.velocities[i];
        if improved {
            *v *= self.params.alpha;
        } else {
            *v = (self.params.beta * *v).max(1.0);
        }
        if accepted {
            state.point.set_component(i, yi, f);
        }
        Iteration {
            mutated: usize::from(yi != xi),
            accepted,
            improved,
        }
    }
}

/// Result of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOutcome {
    pub evaluations: u64,
    pub success: bool,
    pub final_fitness: Fitness,
}

/// Iterates until `f(x) <= threshold` or the budget is spent. On failure the
/// reported evaluation count equals the budget.
pub fn run_until<O: Optimizer, R: Rng + ?Sized>(
    optimizer: &O,
    state: &mut O::State,
    a: &TargetVector,
    budget: &RunBudget,
    threshold: u64,
    rng: &mut R,
) -> RunOutcome {
    while state.point().fitness().value() > threshold {
        if state.evaluations() >= budget.max_evaluations() {
            return RunOutcome {
                evaluations: budget.max_evaluations(),
                success: false,
                final_fitness: state.point().fitness(),
            };
        }
        optimizer.iterate(state, a, rng);
    }
    RunOutcome {
        evaluations: state.evaluations(),
        success: true,
        final_fitness: state.point().fitness(),
    }
}

/// Runs from the origin until the optimum is hit.
pub fn run_to_optimum<O: Optimizer, R: Rng + ?Sized>(
    optimizer: &O,
    a: &TargetVector,
    budget: &RunBudget,
    rng: &mut R,
) -> RunOutcome {
    let mut state = optimizer.init(a);
    run_until(optimizer, &mut state, a, budget, 0, rng)
}

/// Either optimizer behind one type, for configuration-driven callers.
#[derive(Debug, Clone)]
pub enum Algorithm {
    Ea(OnePlusOneEa),
    Rls(SelfAdjustingRls),
}

impl Algorithm {
    pub fn ea(operator: StepOperator) -> Self {
        Algorithm::Ea(OnePlusOneEa::new(operator))
    }

    pub fn rls(params: RlsParams) -> Self {
        Algorithm::Rls(SelfAdjustingRls::new(params))
    }

    pub fn with_box_bound(self, r: Option<u64>) -> Self {
        match self {
            Algorithm::Ea(ea) => Algorithm::Ea(ea.with_box_bound(r)),
            Algorithm::Rls(rls) => Algorithm::Rls(rls.with_box_bound(r)),
        }
    }

    /// Runs from the origin until `f(x) <= threshold`.
    pub fn run<R: Rng + ?Sized>(
        &self,
        a: &TargetVector,
        budget: &RunBudget,
        threshold: u64,
        rng: &mut R,
    ) -> RunOutcome {
        match self {
            Algorithm::Ea(ea) => {
                let mut s = ea.init(a);
                run_until(ea, &mut s, a, budget, threshold, rng)
            }
            Algorithm::Rls(rls) => {
                let mut s = rls.init(a);
                run_until(rls, &mut s, a, budget, threshold, rng)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::HeavyTailedParams;
    use num_bigint::BigInt;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn target(v: &[i64]) -> TargetVector {
        TargetVector::new(v.to_vec()).unwrap()
    }

    fn heavy(eps: f64) -> StepOperator {
        let params = HeavyTailedParams::new(eps).unwrap();
        StepOperator::HeavyTailed(Arc::new(
            HeavyTailedSampler::with_normalizer_config(params, 100_000, 1e-4).unwrap(),
        ))
    }

    fn mean_and_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn single_coordinate_is_always_mutated() {
        let a = target(&[1000]);
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let mut s = ea.init(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            assert_eq!(ea.iterate(&mut s, &a, &mut rng).mutated, 1);
        }
    }

    #[test]
    fn ea_two_state_chain_mean_is_two() {
        let a = target(&[1]);
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let budget = RunBudget::new(1_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let times: Vec<f64> = (0..10_000)
            .map(|_| run_to_optimum(&ea, &a, &budget, &mut rng).evaluations as f64)
            .collect();
        let (mean, _) = mean_and_se(&times);
        assert!((mean - 2.0).abs() <= 0.1, "mean {mean}");
    }

    #[test]
    fn rls_two_state_chain_mean_is_two() {
        let a = target(&[1]);
        let rls = SelfAdjustingRls::new(RlsParams::new(1.7, 0.9).unwrap());
        let budget = RunBudget::new(1_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let times: Vec<f64> = (0..10_000)
            .map(|_| run_to_optimum(&rls, &a, &budget, &mut rng).evaluations as f64)
            .collect();
        let (mean, _) = mean_and_se(&times);
        assert!((mean - 2.0).abs() <= 0.1, "mean {mean}");
    }

    #[test]
    fn ea_one_dimensional_mean_is_twice_the_distance() {
        let a = target(&[5]);
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let budget = RunBudget::new(1_000_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let times: Vec<f64> = (0..10_000)
            .map(|_| run_to_optimum(&ea, &a, &budget, &mut rng).evaluations as f64)
            .collect();
        let (mean, _) = mean_and_se(&times);
        assert!((mean - 10.0).abs() <= 0.5, "mean {mean}");
    }

    #[test]
    fn velocity_floor_semantics() {
        // v = 1.7 moves by exactly 1.
        let a = target(&[100]);
        let rls = SelfAdjustingRls::new(RlsParams::new(1.7, 0.9).unwrap());
        let mut s = RlsState::new(SearchPoint::origin(&a), vec![1.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        rls.iterate(&mut s, &a, &mut rng);
        let x = s.point.components()[0];
        assert!(x == 0 || x == 1);
        if x == 1 {
            assert!((s.velocities[0] - 1.7 * 1.7).abs() < 1e-12);
        } else {
            assert!((s.velocities[0] - 1.53).abs() < 1e-12);
        }
        // v = 1 stays 1 after a rejected step.
        let mut s = RlsState::new(SearchPoint::new(&a, vec![100]).unwrap(), vec![1.0]).unwrap();
        rls.iterate(&mut s, &a, &mut rng);
        assert_eq!(s.velocities[0], 1.0);
        assert_eq!(s.point.components()[0], 100);
    }

    #[test]
    fn rls_rejects_invalid_state() {
        let a = target(&[1, 2]);
        assert!(RlsState::new(SearchPoint::origin(&a), vec![1.0]).is_err());
        assert!(RlsState::new(SearchPoint::origin(&a), vec![1.0, 0.5]).is_err());
        assert!(RlsParams::new(0.9, 0.5).is_err());
        assert!(RlsParams::new(2.0, 0.0).is_err());
    }

    #[test]
    fn run_from_the_optimum_takes_no_evaluations() {
        let a = target(&[4, -4]);
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let mut s = EaState::new(SearchPoint::new(&a, vec![4, -4]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = run_until(&ea, &mut s, &a, &RunBudget::new(10).unwrap(), 0, &mut rng);
        assert_eq!(out, RunOutcome { evaluations: 0, success: true, final_fitness: Fitness(0) });
    }

    #[test]
    fn needs_at_least_l1_improving_unit_steps() {
        let a = target(&[1, 1]);
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let out = run_to_optimum(&ea, &a, &RunBudget::new(1_000_000).unwrap(), &mut rng);
        assert!(out.success && out.evaluations >= 2);
    }

    #[test]
    fn zero_budget_is_rejected_and_failures_report_the_budget() {
        assert!(RunBudget::new(0).is_err());
        let a = TargetVector::all_r(10, 1000).unwrap();
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let out = run_to_optimum(&ea, &a, &RunBudget::new(50).unwrap(), &mut rng);
        assert!(!out.success);
        assert_eq!(out.evaluations, 50);
    }

    #[test]
    fn box_clamp_examples() {
        assert_eq!(apply_box_clamp(&[-3, 5], 4), vec![0, 4]);
        assert_eq!(apply_box_clamp(&[0, 2, 4], 4), vec![0, 2, 4]);
        let once = apply_box_clamp(&[-10, 3, 99], 7);
        assert_eq!(apply_box_clamp(&once, 7), once);
    }

    #[test]
    fn bounded_runs_stay_in_the_box() {
        let r = 50u64;
        let a = TargetVector::all_r(5, r as i64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ea = OnePlusOneEa::new(heavy(0.5)).with_box_bound(Some(r));
        let mut s = ea.init(&a);
        for _ in 0..5000 {
            ea.iterate(&mut s, &a, &mut rng);
            assert!(s.point.components().iter().all(|&c| (0..=r as i64).contains(&c)));
        }
    }

    #[test]
    fn ea_mutation_count_has_mean_one() {
        let a = TargetVector::all_r(7, 1_000_000).unwrap();
        let ea = OnePlusOneEa::new(StepOperator::PlusMinusOne);
        let mut s = ea.init(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let iters = 100_000;
        let counts: Vec<f64> = (0..iters)
            .map(|_| ea.iterate(&mut s, &a, &mut rng).mutated as f64)
            .collect();
        let (mean, _) = mean_and_se(&counts);
        // Binomial(n, 1/n) has variance 1 - 1/n.
        let se = ((1.0 - 1.0 / 7.0) / iters as f64).sqrt();
        assert!((mean - 1.0).abs() <= 4.0 * se, "mean {mean}");
    }

    #[test]
    fn rls_changes_exactly_one_coordinate() {
        let a = TargetVector::new(vec![300, -20, 7, 0]).unwrap();
        let rls = SelfAdjustingRls::new(RlsParams::new(2.0, 0.5).unwrap());
        let mut s = rls.init(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let before = s.point.clone();
            let it = rls.iterate(&mut s, &a, &mut rng);
            let diff = before
                .components()
                .iter()
                .zip(s.point.components())
                .filter(|(p, q)| p != q)
                .count();
            assert_eq!(diff, usize::from(it.accepted && it.mutated == 1));
            assert_eq!(it.mutated, 1);
        }
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let a = TargetVector::all_r(10, 1000).unwrap();
        let algos = [
            Algorithm::ea(StepOperator::PlusMinusOne),
            Algorithm::ea(heavy(0.1)),
            Algorithm::rls(RlsParams::new(1.7, 0.9).unwrap()),
        ];
        let budget = RunBudget::new(10_000_000).unwrap();
        for algo in &algos {
            let r1 = algo.run(&a, &budget, 0, &mut ChaCha8Rng::seed_from_u64(77));
            let r2 = algo.run(&a, &budget, 0, &mut ChaCha8Rng::seed_from_u64(77));
            assert_eq!(r1, r2);
            assert!(r1.success);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fitness_never_increases(seed in any::<u64>(), r in 1i64..10_000, n in 1usize..8) {
            let a = TargetVector::all_r(n, r).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ea = OnePlusOneEa::new(heavy(1.0));
            let rls = SelfAdjustingRls::new(RlsParams::new(1.7, 0.9).unwrap());
            let mut es = ea.init(&a);
            let mut rs = rls.init(&a);
            for _ in 0..300 {
                let (f_ea, f_rls) = (es.point.fitness(), rs.point.fitness());
                ea.iterate(&mut es, &a, &mut rng);
                rls.iterate(&mut rs, &a, &mut rng);
                prop_assert!(es.point.fitness() <= f_ea);
                prop_assert!(rs.point.fitness() <= f_rls);
                prop_assert!(rs.velocities.iter().all(|&v| v >= 1.0));
                prop_assert_eq!(es.point.fitness(), crate::lattice::eval_fitness(&a, &es.point).unwrap());
                prop_assert_eq!(rs.point.fitness(), crate::lattice::eval_fitness(&a, &rs.point).unwrap());
            }
        }

        /// Capping a step at 2^62 never changes selection compared with the
        /// exact (uncapped) step evaluated in arbitrary precision.
        #[test]
        fn saturated_steps_preserve_selection(
            n in 1usize..6,
            seed in any::<u64>(),
            moves in prop::collection::vec((2u32..200, any::<bool>()), 1..6),
        ) {
            let cap: u64 = 1 << 62;
            let r_max = 1_000_000i64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let av: Vec<i64> = (0..n).map(|_| rng.random_range(-r_max..=r_max)).collect();
            prop_assume!(av.iter().any(|&c| c != 0));
            let a = TargetVector::new(av.clone()).unwrap();
            let xv: Vec<i64> = (0..n).map(|_| rng.random_range(-r_max..=r_max)).collect();
            let x = SearchPoint::new(&a, xv.clone()).unwrap();
            prop_assert!(cap > 2 * (n as u64) * (2 * r_max as u64));

            let mut capped = Vec::new();
            let mut exact: Vec<BigInt> = xv.iter().map(|&v| BigInt::from(v)).collect();
            for (k, (exponent, up)) in moves.iter().enumerate() {
                let i = k % n;
                if capped.iter().any(|&(j, _)| j == i) {
                    continue;
                }
                let true_step = BigInt::from(1u8) << (exponent - 2);
                let step = 1u64.checked_shl(exponent - 2).map_or(cap, |s| s.min(cap)) as i64;
                let xi = xv[i];
                if *up {
                    exact[i] += &true_step;
                    capped.push((i, xi.saturating_add(step)));
                } else {
                    exact[i] -= &true_step;
                    capped.push((i, xi.saturating_sub(step)));
                }
            }
            let exact_f: BigInt = av
                .iter()
                .zip(&exact)
                .map(|(ai, yi)| {
                    let d = BigInt::from(*ai) - yi;
                    if d < BigInt::from(0) { -d } else { d }
                })
                .sum();
            let exact_accept = exact_f <= BigInt::from(x.fitness().value());
            let (_, accept) = selection(&a, &x, &capped);
            prop_assert_eq!(accept, exact_accept);
        }
    }
}
