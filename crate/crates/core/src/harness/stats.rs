//! Box-plot statistics: linear-interpolation quartiles, 1.5 IQR whiskers,
//! outlier counts, and failure rates.

use std::collections::BTreeMap;

use super::records::{SummaryRow, TrialResult};

/// Quantile of sorted data by linear interpolation between order
/// statistics at position `(len - 1) * p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub count: usize,
    pub mean: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Smallest datum `>= q1 - 1.5 iqr`.
    pub whisker_low: f64,
    /// Largest datum `<= q3 + 1.5 iqr`.
    pub whisker_high: f64,
    pub outliers: usize,
}

impl BoxStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// `None` for empty input.
pub fn box_stats(data: &[f64]) -> Option<BoxStats> {
    if data.is_empty() {
        return None;
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let whisker_low = *sorted.iter().find(|&&v| v >= low_fence)?;
    let whisker_high = *sorted.iter().rev().find(|&&v| v <= high_fence)?;
    let outliers = sorted
        .iter()
        .filter(|&&v| v < whisker_low || v > whisker_high)
        .count();
    Some(BoxStats {
        count: sorted.len(),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}

/// Fraction of unsuccessful trials; zero for an empty group.
pub fn failure_rate(group: &[&TrialResult]) -> f64 {
    if group.is_empty() {
        return 0.0;
    }
    group.iter().filter(|t| !t.success).count() as f64 / group.len() as f64
}

/// One summary row per `(algorithm, n, r)`, sorted by that key. Statistics
/// cover every trial; failed trials enter at the budget.
pub fn summarize(results: &[TrialResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, usize, u64), Vec<&TrialResult>> = BTreeMap::new();
    for t in results {
        groups
            .entry((t.algorithm.clone(), t.n, t.r))
            .or_default()
            .push(t);
    }
    groups
        .into_iter()
        .map(|((algorithm, n, r), group)| {
            let evals: Vec<f64> = group.iter().map(|t| t.evaluations as f64).collect();
            let s = box_stats(&evals).expect("groups are non-empty");
            SummaryRow {
                algorithm,
                n,
                r,
                count: s.count,
                mean: s.mean,
                q1: s.q1,
                median: s.median,
                q3: s.q3,
                whisker_low: s.whisker_low,
                whisker_high: s.whisker_high,
                outliers: s.outliers,
                failure_rate: failure_rate(&group),
            }
        })
        .collect()
}
