//! Step operators for a single integer coordinate: the unit `±1` step and
//! the heavy-tailed power-of-two step whose size has infinite expectation.
//!
//! The heavy-tailed exponent `I >= 2` has probability proportional to
//! `1 / (i * (log_b i)^(1 + eps))`. The normalizer is the full series
//! `c_eps = sum_{i>=2} 1 / (i * (log_b i)^(1 + eps))`, computed as a
//! partial sum plus an integral bracket on its tail. Exponents above
//! `table_limit` are reported as [`Exponent::TailSaturated`] and mapped to
//! the step cap `saturation_step`. Every step at least that large is
//! rejected by elitist selection anyway, so the cap never changes a
//! selection outcome while `saturation_step > 2 * |a - x|_1`.

use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_LOG_BASE: f64 = 2.0;
pub const DEFAULT_TABLE_LIMIT: u32 = 64;
pub const DEFAULT_SATURATION_STEP: u64 = 1 << 62;
pub const DEFAULT_PARTIAL_SUM_LIMIT: u64 = 10_000_000;
pub const DEFAULT_NORMALIZER_TOLERANCE: f64 = 1e-8;

/// Parameters of the heavy-tailed step distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailedParams {
    pub epsilon: f64,
    pub log_base: f64,
    /// Largest tabulated exponent.
    pub table_limit: u32,
    /// Step-size cap used for every saturated draw.
    pub saturation_step: u64,
}

impl HeavyTailedParams {
    /// Parameters with the default base, table and cap.
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_base(epsilon, DEFAULT_LOG_BASE)
    }

    pub fn with_base(epsilon: f64, log_base: f64) -> Result<Self> {
        let params = Self {
            epsilon,
            log_base,
            table_limit: DEFAULT_TABLE_LIMIT,
            saturation_step: DEFAULT_SATURATION_STEP,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if !(self.log_base > 1.0 && self.log_base.is_finite()) {
            return Err(Error::invalid("log_base", format!("must be > 1, got {}", self.log_base)));
        }
        if self.table_limit < 2 {
            return Err(Error::invalid("table_limit", "must be >= 2"));
        }
        if self.saturation_step == 0 || self.saturation_step > i64::MAX as u64 {
            return Err(Error::invalid(
                "saturation_step",
                format!("must be in [1, {}], got {}", i64::MAX, self.saturation_step),
            ));
        }
        if power_of_two(self.table_limit - 2).is_some_and(|p| p < self.saturation_step) {
            return Err(Error::invalid(
                "table_limit",
                format!(
                    "2^(table_limit - 2) must be >= saturation_step ({})",
                    self.saturation_step
                ),
            ));
        }
        Ok(())
    }

    /// Unnormalized weight `1 / (i * (log_b i)^(1 + eps))`.
    pub fn pmf_numerator(&self, i: u64) -> Result<f64> {
        if i < 2 {
            return Err(Error::invalid("i", format!("exponent must be >= 2, got {i}")));
        }
        Ok(self.weight(i as f64))
    }

    #[inline]
    fn weight(&self, i: f64) -> f64 {
        let log = i.ln() / self.log_base.ln();
        1.0 / (i * log.powf(1.0 + self.epsilon))
    }

    /// `integral_from^inf dx / (x * (log_b x)^(1 + eps))`.
    fn tail_integral(&self, from: f64) -> f64 {
        let log = from.ln() / self.log_base.ln();
        self.log_base.ln() / self.epsilon * log.powf(-self.epsilon)
    }
}

/// `2^k` if it fits in a `u64`.
fn power_of_two(k: u32) -> Option<u64> {
    1u64.checked_shl(k)
}

/// The normalizer with a rigorous enclosing interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub partial_sum_limit: u64,
    /// Requested maximum bracket width.
    pub tolerance: f64,
}

impl Normalizer {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// False when the partial-sum limit was too small for the tolerance.
    pub fn tolerance_met(&self) -> bool {
        self.width() <= self.tolerance
    }
}

/// Computes `c_eps` as `S_N + tail`, bracketing the tail between
/// `integral_{N+1}^inf` and `integral_N^inf` of the (decreasing) summand.
///
/// The returned value is the bracket midpoint. A bracket wider than
/// `tolerance` is reported through [`Normalizer::tolerance_met`].
pub fn compute_c_epsilon(
    params: &HeavyTailedParams,
    partial_sum_limit: u64,
    tolerance: f64,
) -> Result<Normalizer> {
    params.validate()?;
    if partial_sum_limit < 2 {
        return Err(Error::invalid("partial_sum_limit", "must be >= 2"));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::invalid("tolerance", "must be > 0"));
    }
    // Smallest terms first, Neumaier-compensated.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for i in (2..=partial_sum_limit).rev() {
        let term = params.weight(i as f64);
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    let partial = sum + comp;
    let n = partial_sum_limit as f64;
    let tail_low = params.tail_integral(n + 1.0);
    let tail_high = params.tail_integral(n);
    // Allowance for rounding in the term evaluations and the summation.
    let slack = 16.0 * f64::EPSILON * (partial + tail_high);
    let lower = partial + tail_low - slack;
    let upper = partial + tail_high + slack;
    Ok(Normalizer {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        partial_sum_limit,
        tolerance,
    })
}

/// Outcome of drawing the exponent `I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    /// A tabulated exponent `2 <= I <= table_limit`.
    Index(u32),
    /// `I > table_limit`; the step is `saturation_step`.
    TailSaturated,
}

/// Inverse-transform sampler over the tabulated exponent distribution.
#[derive(Debug, Clone)]
pub struct HeavyTailedSampler {
    params: HeavyTailedParams,
    normalizer: Normalizer,
    /// `cdf[k] = P(I <= k + 2)`.
    cdf: Vec<f64>,
    tail_mass: f64,
}

impl HeavyTailedSampler {
    /// Builds the sampler with the default partial-sum limit and tolerance.
    pub fn new(params: HeavyTailedParams) -> Result<Self> {
        Self::with_normalizer_config(
            params,
            DEFAULT_PARTIAL_SUM_LIMIT,
            DEFAULT_NORMALIZER_TOLERANCE,
        )
    }

    pub fn with_normalizer_config(
        params: HeavyTailedParams,
        partial_sum_limit: u64,
        tolerance: f64,
    ) -> Result<Self> {
        let normalizer = compute_c_epsilon(&params, partial_sum_limit, tolerance)?;
        if !normalizer.tolerance_met() {
            return Err(Error::invalid(
                "partial_sum_limit",
                format!(
                    "normalizer bracket width {:e} exceeds tolerance {:e} at limit {}",
                    normalizer.width(),
                    tolerance,
                    partial_sum_limit
                ),
            ));
        }
        let mut cdf = Vec::with_capacity(params.table_limit as usize - 1);
        let mut acc = 0.0;
        for i in 2..=params.table_limit {
            acc += params.weight(i as f64) / normalizer.value;
            cdf.push(acc);
        }
        let last = *cdf.last().expect("table_limit >= 2");
        if last > 1.0 {
            return Err(Error::invalid(
                "table_limit",
                format!("tabulated mass {last} exceeds 1"),
            ));
        }
        Ok(Self {
            params,
            normalizer,
            cdf,
            tail_mass: 1.0 - last,
        })
    }

    pub fn params(&self) -> &HeavyTailedParams {
        &self.params
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Cumulative probabilities for `I = 2..=table_limit`.
    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// `P(I = i)` for a tabulated exponent, zero otherwise.
    pub fn probability(&self, i: u32) -> f64 {
        if i < 2 || i > self.params.table_limit {
            return 0.0;
        }
        let k = (i - 2) as usize;
        if k == 0 {
            self.cdf[0]
        } else {
            self.cdf[k] - self.cdf[k - 1]
        }
    }

    pub fn sample_exponent<R: Rng + ?Sized>(&self, rng: &mut R) -> Exponent {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u);
        if k < self.cdf.len() {
            Exponent::Index(k as u32 + 2)
        } else {
            Exponent::TailSaturated
        }
    }

    /// Step size for an exponent: `2^(I - 2)` capped at `saturation_step`.
    pub fn step_size(&self, exponent: Exponent) -> u64 {
        match exponent {
            Exponent::Index(i) => power_of_two(i - 2)
                .map_or(self.params.saturation_step, |s| s.min(self.params.saturation_step)),
            Exponent::TailSaturated => self.params.saturation_step,
        }
    }

    pub fn sample_step_size<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.step_size(self.sample_exponent(rng))
    }

    /// `x ± s` for a sampled step size `s`, sign uniform, saturating.
    pub fn heavy_tailed_step<R: Rng + ?Sized>(&self, x: i64, rng: &mut R) -> i64 {
        let step = self.sample_step_size(rng) as i64;
        if rng.random_bool(0.5) {
            x.saturating_add(step)
        } else {
            x.saturating_sub(step)
        }
    }
}

/// `x + 1` or `x - 1` with probability 1/2 each, saturating.
pub fn pm1_step<R: Rng + ?Sized>(x: i64, rng: &mut R) -> i64 {
    if rng.random_bool(0.5) {
        x.saturating_add(1)
    } else {
        x.saturating_sub(1)
    }
}
