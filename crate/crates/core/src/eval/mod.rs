//! Metrics, model comparison, the local-structure regression study and the
//! closed-form direction baseline.

pub(crate) mod binary;
pub mod coeffratio;
pub mod direction;
pub mod metrics;
pub mod report;

pub use coeffratio::{
    coeff_ratio_fit, coeff_ratio_study, coefficient_ratio, median, pooled_rows, CoeffRatioConfig, CoeffRatioResult,
    RatioEntry,
};
pub use direction::{direction_comparison, increment_correlation, theoretical_pup, DirectionComparison};
pub use metrics::{
    cross_entropy, label_rank, nll_per_sample, pct_decrease, pct_decrease_matrix, tail_metrics, topk_accuracy,
    win_matrix, TailMetrics, DEFAULT_K_MAX,
};
pub use report::{build_report, EvalReport, ModelMetrics};
