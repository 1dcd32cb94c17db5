//! Scoring, cross-validation, run aggregation and significance testing.

mod cv;
mod metrics;
mod report;
mod stats;

pub use cv::{cross_validate, cross_validate_joint, ids_disjoint, thread_pool, Labeled, THREADS_ENV};
pub use metrics::{weighted_prf, weighted_prf_indices, ClassScores, ConfusionMatrix, PrfReport, Scores};
pub use report::{render_table, EvalReport, TableRow};
pub use stats::{compare_models, paired_t_test, significance_stars, t_two_sided_p, Comparison, TTestResult, Winner};
