//! Hard-binned reference histograms.
//!
//! Soft estimators are judged against plain counting. Two membership rules
//! are offered because they disagree exactly on bin boundaries, and boundary
//! samples are where soft/hard comparisons need care.

use serde::{Deserialize, Serialize};

use crate::bins::BinSpec;
use crate::error::{Error, Result};
use crate::histogram::{Histogram, Normalization};
use crate::samples::SampleBatch;

/// How a sample is assigned to bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// A sample lands in every bin whose open interval (mu - omega, mu + omega)
    /// strictly contains it. Boundary samples count nowhere; overlapping bins
    /// can each claim the same sample.
    OpenInterval,
    /// Bins partition [e_0, e_K] with e_k = mu_k - omega_k and
    /// e_K = mu_K + omega_K. Bin k is [e_k, e_{k+1}), except the last bin,
    /// which is closed at the top. Requires strictly increasing edges.
    #[default]
    RightOpenEdges,
}

impl std::fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryMode::OpenInterval => write!(f, "open_interval"),
            BoundaryMode::RightOpenEdges => write!(f, "right_open_edges"),
        }
    }
}

/// Count samples per bin under `mode`, then optionally divide by the number
/// of samples.
pub fn hard_histogram(
    bins: &BinSpec,
    samples: &SampleBatch,
    mode: BoundaryMode,
    normalization: Normalization,
) -> Result<Histogram> {
    let mut counts = vec![0.0f64; bins.len()];
    match mode {
        BoundaryMode::OpenInterval => {
            for &x in samples {
                for (k, count) in counts.iter_mut().enumerate() {
                    if (x - bins.center(k)).abs() < bins.half_width(k) {
                        *count += 1.0;
                    }
                }
            }
        }
        BoundaryMode::RightOpenEdges => {
            let edges = bins.left_edges_plus_end();
            if edges.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidBins(
                    "right-open edge binning needs strictly increasing edges".into(),
                ));
            }
            let hi = *edges.last().expect("bins are never empty");
            for &x in samples {
                if x < edges[0] || x > hi {
                    continue;
                }
                let k = if x == hi {
                    bins.len() - 1
                } else {
                    // partition_point counts edges <= x, so bin index is one less.
                    edges.partition_point(|&e| e <= x) - 1
                };
                counts[k] += 1.0;
            }
        }
    }
    let hist = Histogram::new(bins.clone(), counts, Normalization::Counts)?;
    match normalization {
        Normalization::Counts => Ok(hist),
        Normalization::Probability => hist.into_probability(samples.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bins::{make_uniform_bins, BinSpec};

    fn batch(values: &[f64]) -> SampleBatch {
        SampleBatch::new(values.to_vec()).unwrap()
    }

    #[test]
    fn right_open_edges_places_boundaries_left_inclusive() {
        let bins = make_uniform_bins(-1.0, 1.0, 4).unwrap();
        // Edges are -1, -0.5, 0, 0.5, 1.
        let samples = batch(&[-1.0, -0.5, 0.0, 0.99, 1.0, 1.0000001, -1.0000001]);
        let h = hard_histogram(
            &bins,
            &samples,
            BoundaryMode::RightOpenEdges,
            Normalization::Counts,
        )
        .unwrap();
        assert_eq!(h.values(), &[1.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn last_bin_is_closed_at_the_top() {
        let bins = make_uniform_bins(0.0, 1.0, 2).unwrap();
        let h = hard_histogram(
            &bins,
            &batch(&[1.0]),
            BoundaryMode::RightOpenEdges,
            Normalization::Counts,
        )
        .unwrap();
        assert_eq!(h.values(), &[0.0, 1.0]);
    }

    #[test]
    fn open_interval_drops_boundary_samples() {
        let bins = make_uniform_bins(-1.0, 1.0, 4).unwrap();
        let samples = batch(&[-0.5, 0.0, 0.5, -0.75, 0.25]);
        let h = hard_histogram(
            &bins,
            &samples,
            BoundaryMode::OpenInterval,
            Normalization::Counts,
        )
        .unwrap();
        // The three shared-edge samples belong to no open interval.
        assert_eq!(h.values(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn open_interval_lets_overlapping_bins_share_samples() {
        let bins = BinSpec::new(vec![0.0, 0.5], vec![0.6, 0.6]).unwrap();
        let h = hard_histogram(
            &bins,
            &batch(&[0.25]),
            BoundaryMode::OpenInterval,
            Normalization::Counts,
        )
        .unwrap();
        assert_eq!(h.values(), &[1.0, 1.0]);
    }

    #[test]
    fn right_open_edges_rejects_disordered_edges() {
        // Second bin reaches far enough left that its lower edge precedes the
        // first bin's lower edge.
        let bins = BinSpec::new(vec![0.0, 1.0], vec![0.5, 3.0]).unwrap();
        let err = hard_histogram(
            &bins,
            &batch(&[0.0]),
            BoundaryMode::RightOpenEdges,
            Normalization::Counts,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidBins(_)));
        // The per-bin rule has no such constraint.
        assert!(hard_histogram(
            &bins,
            &batch(&[0.0]),
            BoundaryMode::OpenInterval,
            Normalization::Counts,
        )
        .is_ok());
    }

    #[test]
    fn probability_scale_divides_by_sample_count_not_hits() {
        let bins = make_uniform_bins(0.0, 1.0, 2).unwrap();
        // One sample falls outside the range entirely.
        let h = hard_histogram(
            &bins,
            &batch(&[0.25, 0.25, 0.75, 5.0]),
            BoundaryMode::RightOpenEdges,
            Normalization::Probability,
        )
        .unwrap();
        assert_eq!(h.values(), &[0.5, 0.25]);
        assert!(h.sum() <= 1.0 + 1e-9);
    }

    #[test]
    fn matches_brute_force_scan_on_a_grid() {
        let bins = make_uniform_bins(-2.0, 2.0, 7).unwrap();
        let values: Vec<f64> = (0..500).map(|i| -2.5 + i as f64 * 0.01).collect();
        let samples = batch(&values);
        let fast = hard_histogram(
            &bins,
            &samples,
            BoundaryMode::RightOpenEdges,
            Normalization::Counts,
        )
        .unwrap();
        let edges = bins.left_edges_plus_end();
        let mut slow = vec![0.0; bins.len()];
        for &x in &samples {
            for k in 0..bins.len() {
                let closed_top = k == bins.len() - 1 && x == edges[k + 1];
                if (x >= edges[k] && x < edges[k + 1]) || closed_top {
                    slow[k] += 1.0;
                }
            }
        }
        assert_eq!(fast.values(), slow.as_slice());
    }
}
