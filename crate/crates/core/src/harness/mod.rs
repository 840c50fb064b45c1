//! Experiment orchestration: run grids over `(n, r)`, seeded repetitions,
//! CSV persistence and box-plot summaries.

pub mod config;
pub mod matrix;
pub mod records;
pub mod stats;

pub use config::{parse_settings, parse_u64_list, AlgorithmSpec, ExperimentConfig, Settings};
pub use matrix::{
    collect_matrix, run_bench, run_matrix, run_trial, trial_plan, PreparedExperiment, TrialKey,
};
pub use records::{
    read_summary, read_trials, write_summary, write_trials, SummaryRow, TrialResult, TrialWriter,
    SUMMARY_HEADER, TRIAL_HEADER,
};
pub use stats::{box_stats, failure_rate, quantile, summarize, BoxStats};
