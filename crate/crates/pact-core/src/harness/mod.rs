//! Monte Carlo experiments, estimators, comparison against theory and
//! report emission.

mod compare;
mod config;
mod estimate;
mod experiment;
mod report;
pub mod suite;

pub use compare::{compare, compare_matrix, compare_value, overall, Comparison, Tolerance, Verdict};
pub use config::{ExperimentConfig, Statistic};
pub use estimate::{empirical_pmf, ls_slope, sampling_tv, summarize, total_variation, SampleSummary};
pub use experiment::{root_cluster_sizes, run_experiment};
pub use report::{Meta, ModelMeta, OutputFormat, Report, ScaledSummary, StatisticResult};
