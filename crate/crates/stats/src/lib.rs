//! Hypothesis tests for fully within-subject experiments.
//!
//! Everything here is pure computation over slices and small tables:
//! two-way repeated-measures ANOVA, the Friedman rank test, paired t and
//! Wilcoxon signed-rank tests, family-wise p-value corrections, and the
//! regularized incomplete beta/gamma functions the p-values come from.

pub mod anova;
pub mod dist;
mod error;
pub mod nonparametric;
mod result;
pub mod special;
pub mod ttest;

pub use anova::{rm_anova_2way, CellTable, RmAnova};
pub use error::StatsError;
pub use nonparametric::{friedman, wilcoxon_signed_rank};
pub use result::{correct_family, Correction, Df, StatResult};
pub use ttest::paired_t;

/// Arithmetic mean; `NaN` for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); `NaN` when fewer than two values.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (ss / (n - 1) as f64).sqrt()
}
