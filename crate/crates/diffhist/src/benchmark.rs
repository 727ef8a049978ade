//! Side-by-side approximation error of each soft kernel against hard
//! counting, on one shared sample batch.

use serde::{Deserialize, Serialize};

use crate::bins::BinSpec;
use crate::error::{Error, Result};
use crate::histogram::{sum_abs_distance, Histogram, Normalization};
use crate::kernels::{BoundKernel, KernelKind};
use crate::oracle::{hard_histogram, BoundaryMode};
use crate::samples::SampleBatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    #[default]
    SumAbs,
    MeanAbs,
}

impl std::fmt::Display for ErrorMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorMetric::SumAbs => write!(f, "sum_abs"),
            ErrorMetric::MeanAbs => write!(f, "mean_abs"),
        }
    }
}

impl std::str::FromStr for ErrorMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum_abs" => Ok(ErrorMetric::SumAbs),
            "mean_abs" => Ok(ErrorMetric::MeanAbs),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric {other:?}, expected sum_abs or mean_abs"
            ))),
        }
    }
}

/// Aggregate per-bin absolute differences between a soft histogram and its
/// hard reference. Rejects mismatched bin counts or normalizations.
pub fn absolute_error(soft: &Histogram, hard: &Histogram, metric: ErrorMetric) -> Result<f64> {
    if soft.normalization() != hard.normalization() {
        return Err(Error::Mismatch(format!(
            "cannot compare {} values against {}",
            soft.normalization(),
            hard.normalization()
        )));
    }
    let sum = sum_abs_distance(soft.values(), hard.values())?;
    Ok(match metric {
        ErrorMetric::SumAbs => sum,
        ErrorMetric::MeanAbs => sum / soft.len() as f64,
    })
}

/// One kernel's line in a comparison report.
#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub kernel: KernelKind,
    /// Resolved per-bin shape parameters, recorded so the row can be rerun.
    pub params: Vec<f64>,
    /// Error at the requested normalization and metric.
    pub error: f64,
    /// Same metric at counts scale, where per-sample over-counts accumulate
    /// instead of averaging out.
    pub counts_error: f64,
    /// Soft histogram at the requested normalization.
    pub histogram: Histogram,
    /// Per-bin |soft_k - hard_k| at the requested normalization.
    pub per_bin_abs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub n_samples: usize,
    pub boundary: BoundaryMode,
    pub normalization: Normalization,
    pub metric: ErrorMetric,
    /// Hard reference at the requested normalization.
    pub oracle: Histogram,
    /// One row per kernel, sorted by descending error.
    pub rows: Vec<KernelRow>,
}

/// Build the hard reference once, each requested soft histogram once, and
/// one error row per kernel, sorted worst-first. `base` and `bandwidth`
/// replace the histlayer/kde defaults when given.
#[allow(clippy::too_many_arguments)]
pub fn run_comparison(
    samples: &SampleBatch,
    bins: &BinSpec,
    kernels: &[KernelKind],
    boundary: BoundaryMode,
    normalization: Normalization,
    metric: ErrorMetric,
    base: Option<f64>,
    bandwidth: Option<f64>,
) -> Result<ComparisonReport> {
    if kernels.is_empty() {
        return Err(Error::InvalidParameter(
            "comparison needs at least one kernel".into(),
        ));
    }
    let n = samples.len();
    let hard_counts = hard_histogram(bins, samples, boundary, Normalization::Counts)?;
    let hard = normalize(hard_counts.clone(), normalization, n)?;

    let mut rows = Vec::with_capacity(kernels.len());
    for &kind in kernels {
        let kernel = BoundKernel::with_overrides(kind, bins, base, bandwidth)?;
        let soft_counts = kernel.histogram(samples, Normalization::Counts)?;
        if kind == KernelKind::HistLayer {
            assert_overcount_bound(&kernel, &soft_counts, samples);
        }
        let counts_error = absolute_error(&soft_counts, &hard_counts, metric)?;
        let soft = normalize(soft_counts, normalization, n)?;
        let error = absolute_error(&soft, &hard, metric)?;
        let per_bin_abs = soft
            .values()
            .iter()
            .zip(hard.values())
            .map(|(s, h)| (s - h).abs())
            .collect();
        rows.push(KernelRow {
            kernel: kind,
            params: kernel.params().to_vec(),
            error,
            counts_error,
            histogram: soft,
            per_bin_abs,
        });
    }
    rows.sort_by(|a, b| b.error.total_cmp(&a.error));
    Ok(ComparisonReport {
        n_samples: n,
        boundary,
        normalization,
        metric,
        oracle: hard,
        rows,
    })
}

fn normalize(counts: Histogram, normalization: Normalization, n: usize) -> Result<Histogram> {
    match normalization {
        Normalization::Counts => Ok(counts),
        Normalization::Probability => counts.into_probability(n),
    }
}

/// The histlayer vote over-counts each strictly-inside sample by at most a
/// factor b^omega, so against strict-interior counting the total error is
/// bounded by (b^omega_max - 1) times the number of interior memberships.
/// This holds for any batch and any base, so it runs on every comparison.
fn assert_overcount_bound(kernel: &BoundKernel, soft_counts: &Histogram, samples: &SampleBatch) {
    let bins = kernel.bins();
    let strict = hard_histogram(
        bins,
        samples,
        BoundaryMode::OpenInterval,
        Normalization::Counts,
    )
    .expect("strict-interior counting accepts any bins");
    let memberships: f64 = strict.values().iter().sum();
    let base = kernel.params()[0];
    let omega_max = bins
        .half_widths()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = (base.powf(omega_max) - 1.0) * memberships;
    let total = sum_abs_distance(soft_counts.values(), strict.values())
        .expect("bins match by construction");
    assert!(
        total <= bound * (1.0 + 1e-9) + 1e-30,
        "over-count bound violated: sum abs {total} > {bound}"
    );
    for (h, c) in soft_counts.values().iter().zip(strict.values()) {
        assert!(
            *h >= *c && *h <= c * base.powf(omega_max) * (1.0 + 1e-9),
            "per-bin bracket violated: count {c}, soft {h}"
        );
    }
}
