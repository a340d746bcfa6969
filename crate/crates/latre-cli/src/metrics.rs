//! Replication error metrics: mean and median summaries of the estimate
//! errors against the known true effect.

use serde::Serialize;

/// The four error summaries reported per method. Smaller is better in every
/// slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorMetrics {
    /// |mean(estimate - truth)|
    pub abs_mean_error: f64,
    /// mean |estimate - truth|
    pub mean_abs_error: f64,
    /// |median(estimate - truth)|
    pub abs_median_error: f64,
    /// median |estimate - truth|
    pub median_abs_error: f64,
}

/// Median with the midpoint convention for even lengths. Sorts a copy.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty vector");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

pub fn error_metrics(estimates: &[f64], truth: f64) -> ErrorMetrics {
    assert!(!estimates.is_empty(), "metrics need at least one estimate");
    let errors: Vec<f64> = estimates.iter().map(|e| e - truth).collect();
    let abs_errors: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    let n = errors.len() as f64;
    ErrorMetrics {
        abs_mean_error: (errors.iter().sum::<f64>() / n).abs(),
        mean_abs_error: abs_errors.iter().sum::<f64>() / n,
        abs_median_error: median(&errors).abs(),
        median_abs_error: median(&abs_errors),
    }
}
