//! Bin geometry in center/half-width coordinates.
//!
//! A bin k is the interval (mu_k - omega_k, mu_k + omega_k). Storing centers
//! and half-widths keeps the soft-binning vote math in the coordinates it is
//! written in; edge representations are derived on demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBinSpec")]
pub struct BinSpec {
    centers: Vec<f64>,
    half_widths: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBinSpec {
    centers: Vec<f64>,
    half_widths: Vec<f64>,
}

impl TryFrom<RawBinSpec> for BinSpec {
    type Error = Error;

    fn try_from(raw: RawBinSpec) -> Result<Self> {
        BinSpec::new(raw.centers, raw.half_widths)
    }
}

impl BinSpec {
    /// Validated construction: at least one bin, finite values, strictly
    /// increasing centers, positive half-widths. Bins may overlap or leave
    /// gaps; membership is per-bin.
    pub fn new(centers: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidBins("need at least one bin".into()));
        }
        if centers.len() != half_widths.len() {
            return Err(Error::InvalidBins(format!(
                "{} centers but {} half-widths",
                centers.len(),
                half_widths.len()
            )));
        }
        for (k, (&mu, &om)) in centers.iter().zip(&half_widths).enumerate() {
            if !mu.is_finite() || !om.is_finite() {
                return Err(Error::InvalidBins(format!("non-finite bin {k}")));
            }
            if om <= 0.0 {
                return Err(Error::InvalidBins(format!(
                    "half-width of bin {k} must be positive, got {om}"
                )));
            }
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidBins(
                "centers must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            centers,
            half_widths,
        })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one bin
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn center(&self, k: usize) -> f64 {
        self.centers[k]
    }

    pub fn half_width(&self, k: usize) -> f64 {
        self.half_widths[k]
    }

    /// Lower edge of the first bin.
    pub fn lo(&self) -> f64 {
        self.centers[0] - self.half_widths[0]
    }

    /// Upper edge of the last bin.
    pub fn hi(&self) -> f64 {
        let k = self.len() - 1;
        self.centers[k] + self.half_widths[k]
    }

    /// K+1 edges e_k = mu_k - omega_k plus the final mu_K + omega_K.
    pub fn left_edges_plus_end(&self) -> Vec<f64> {
        let mut edges: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.half_widths)
            .map(|(&mu, &om)| mu - om)
            .collect();
        edges.push(self.hi());
        edges
    }

    /// True when every half-width equals the first to within 1e-9 relative.
    pub fn is_uniform(&self) -> bool {
        let om0 = self.half_widths[0];
        self.half_widths
            .iter()
            .all(|&om| (om - om0).abs() <= 1e-9 * om0.max(1.0))
    }
}

/// K equal-width bins covering [lo, hi]: width W = (hi - lo)/K, centers
/// mu_k = lo + (k - 1/2) W, half-widths W/2.
pub fn make_uniform_bins(lo: f64, hi: f64, k: usize) -> Result<BinSpec> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidBins(format!("non-finite range [{lo}, {hi}]")));
    }
    if lo >= hi {
        return Err(Error::InvalidBins(format!(
            "range must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidBins("bin count must be positive".into()));
    }
    let w = (hi - lo) / k as f64;
    let centers: Vec<f64> = (0..k).map(|i| lo + (i as f64 + 0.5) * w).collect();
    let half_widths = vec![w / 2.0; k];
    BinSpec::new(centers, half_widths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_bins_over_unit_range() {
        let bins = make_uniform_bins(-1.0, 1.0, 20).unwrap();
        assert_eq!(bins.len(), 20);
        assert!(bins.half_widths().iter().all(|&om| om == 0.05));
        assert!((bins.center(0) - -0.95).abs() < 1e-12);
        assert!((bins.center(19) - 0.95).abs() < 1e-12);
    }

    #[test]
    fn single_bin() {
        let bins = make_uniform_bins(0.0, 1.0, 1).unwrap();
        assert_eq!(bins.center(0), 0.5);
        assert_eq!(bins.half_width(0), 0.5);
    }

    #[test]
    fn centers_match_direct_formula() {
        // Independent recomputation of mu_k = lo + (k - 1/2) W.
        let (lo, hi, k) = (-3.0, 3.0, 6);
        let bins = make_uniform_bins(lo, hi, k).unwrap();
        let w = (hi - lo) / k as f64;
        for i in 0..k {
            let expect = lo + (i as f64 + 1.0 - 0.5) * w;
            assert!((bins.center(i) - expect).abs() < 1e-12);
            assert!((bins.half_width(i) - w / 2.0).abs() < 1e-12);
        }
        assert_eq!(bins.centers(), &[-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]);
    }

    #[test]
    fn uniform_bins_tile_the_range() {
        let bins = make_uniform_bins(-1.0, 1.0, 20).unwrap();
        assert!((bins.lo() - -1.0).abs() < 1e-12);
        assert!((bins.hi() - 1.0).abs() < 1e-12);
        for k in 0..bins.len() - 1 {
            let upper = bins.center(k) + bins.half_width(k);
            let lower_next = bins.center(k + 1) - bins.half_width(k + 1);
            assert!((upper - lower_next).abs() < 1e-12);
            assert!((bins.center(k + 1) - bins.center(k) - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn shifting_range_shifts_centers() {
        let delta = 0.37;
        let a = make_uniform_bins(-1.0, 1.0, 20).unwrap();
        let b = make_uniform_bins(-1.0 + delta, 1.0 + delta, 20).unwrap();
        for k in 0..20 {
            assert!((b.center(k) - a.center(k) - delta).abs() < 1e-12);
            assert_eq!(b.half_width(k), a.half_width(k));
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(make_uniform_bins(1.0, 1.0, 5).is_err());
        assert!(make_uniform_bins(2.0, 1.0, 5).is_err());
        assert!(make_uniform_bins(f64::NAN, 1.0, 5).is_err());
        assert!(make_uniform_bins(0.0, f64::INFINITY, 5).is_err());
        assert!(make_uniform_bins(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn rejects_bad_direct_construction() {
        assert!(BinSpec::new(vec![], vec![]).is_err());
        assert!(BinSpec::new(vec![0.0, 1.0], vec![0.1]).is_err());
        assert!(BinSpec::new(vec![0.0, 0.0], vec![0.1, 0.1]).is_err());
        assert!(BinSpec::new(vec![1.0, 0.0], vec![0.1, 0.1]).is_err());
        assert!(BinSpec::new(vec![0.0], vec![0.0]).is_err());
        assert!(BinSpec::new(vec![0.0], vec![-0.1]).is_err());
        assert!(BinSpec::new(vec![0.0], vec![f64::NAN]).is_err());
    }

    #[test]
    fn non_uniform_allowed() {
        let bins = BinSpec::new(vec![0.0, 1.0, 3.0], vec![0.5, 0.4, 1.0]).unwrap();
        assert!(!bins.is_uniform());
        assert_eq!(bins.lo(), -0.5);
        assert_eq!(bins.hi(), 4.0);
    }

    #[test]
    fn serde_round_trip_validates() {
        let bins = make_uniform_bins(-1.0, 1.0, 4).unwrap();
        let text = serde_json::to_string(&bins).unwrap();
        let back: BinSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, bins);

        let bad = r#"{"centers":[1.0,0.0],"half_widths":[0.1,0.1]}"#;
        assert!(serde_json::from_str::<BinSpec>(bad).is_err());
    }
}
