//! Histogram values aligned with a bin specification.

use serde::{Deserialize, Serialize};

use crate::bins::BinSpec;
use crate::error::{Error, Result};

/// Scale of the per-bin values: raw accumulated mass, or mass divided by the
/// number of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Counts,
    Probability,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Normalization::Counts => write!(f, "counts"),
            Normalization::Probability => write!(f, "probability"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHistogram")]
pub struct Histogram {
    bins: BinSpec,
    values: Vec<f64>,
    normalization: Normalization,
}

#[derive(Deserialize)]
struct RawHistogram {
    bins: BinSpec,
    values: Vec<f64>,
    normalization: Normalization,
}

impl TryFrom<RawHistogram> for Histogram {
    type Error = Error;

    fn try_from(raw: RawHistogram) -> Result<Self> {
        Histogram::new(raw.bins, raw.values, raw.normalization)
    }
}

impl Histogram {
    pub fn new(bins: BinSpec, values: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if values.len() != bins.len() {
            return Err(Error::Mismatch(format!(
                "{} values for {} bins",
                values.len(),
                bins.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Mismatch(format!("non-finite value in bin {k}")));
        }
        Ok(Self {
            bins,
            values,
            normalization,
        })
    }

    pub fn bins(&self) -> &BinSpec {
        &self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Convert a counts-scale histogram to probability scale by dividing
    /// every bin by `n_samples`. An empty batch carries an all-zero counts
    /// histogram, which stays all-zero; nonzero counts with zero samples are
    /// inconsistent and rejected.
    pub fn into_probability(self, n_samples: usize) -> Result<Self> {
        match self.normalization {
            Normalization::Probability => Ok(self),
            Normalization::Counts => {
                if n_samples == 0 {
                    if self.values.iter().any(|&v| v != 0.0) {
                        return Err(Error::Mismatch(
                            "cannot normalize nonzero counts by zero samples".into(),
                        ));
                    }
                    return Histogram::new(self.bins, self.values, Normalization::Probability);
                }
                let n = n_samples as f64;
                let values = self.values.into_iter().map(|v| v / n).collect();
                Histogram::new(self.bins, values, Normalization::Probability)
            }
        }
    }
}

/// Sum of per-bin absolute differences. Errors when lengths differ.
pub fn sum_abs_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "cannot compare {} bins with {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

/// Mean of per-bin absolute differences. Errors when lengths differ or both
/// are empty.
pub fn mean_abs_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Mismatch("cannot average over zero bins".into()));
    }
    Ok(sum_abs_distance(a, b)? / a.len() as f64)
}
