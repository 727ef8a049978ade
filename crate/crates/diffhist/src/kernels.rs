//! Soft-binning votes and their exact first derivatives.
//!
//! Each kernel turns "sample x belongs to bin (mu - omega, mu + omega)" into
//! a differentiable vote v(x). Every vote carries closed-form partials with
//! respect to the sample, the bin center, the half-width, and the kernel's
//! own shape parameter, so histograms built from these votes can sit inside
//! gradient-based training loops.
//!
//! * `histlayer`: exponential peak b^(omega - |x - mu|), kept only where it
//!   exceeds 1. Near-binary votes for b close to 1.
//! * `lbf`: linear tent max(0, 1 - w|x - mu|).
//! * `rbf`: Gaussian bump exp(-gamma^2 (x - mu)^2).
//! * `kde`: sigmoid-difference window, the integral of a logistic density
//!   over the bin. Evaluated in log space so tail votes and tail gradients
//!   survive the cancellation that kills the naive sigma(a) - sigma(b) form.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bins::BinSpec;
use crate::error::{Error, Result};
use crate::histogram::{Histogram, Normalization};
use crate::samples::SampleBatch;

/// Default exponential base for the histlayer kernel.
pub const DEFAULT_BASE: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    HistLayer,
    Lbf,
    Rbf,
    Kde,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::HistLayer,
        KernelKind::Lbf,
        KernelKind::Rbf,
        KernelKind::Kde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::HistLayer => "histlayer",
            KernelKind::Lbf => "lbf",
            KernelKind::Rbf => "rbf",
            KernelKind::Kde => "kde",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "histlayer" => Ok(KernelKind::HistLayer),
            "lbf" => Ok(KernelKind::Lbf),
            "rbf" => Ok(KernelKind::Rbf),
            "kde" => Ok(KernelKind::Kde),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel {other:?}, expected one of histlayer, lbf, rbf, kde"
            ))),
        }
    }
}

/// A vote and its exact partial derivatives.
///
/// `d_dmu` is always the negation of `d_dx`: every kernel depends on the
/// sample only through x - mu.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteGradient {
    pub value: f64,
    pub d_dx: f64,
    pub d_dmu: f64,
    pub d_domega: f64,
    pub d_dparam: f64,
}

impl VoteGradient {
    pub const ZERO: VoteGradient = VoteGradient {
        value: 0.0,
        d_dx: 0.0,
        d_dmu: 0.0,
        d_domega: 0.0,
        d_dparam: 0.0,
    };
}

/// Sign with sign(0) = 0, unlike `f64::signum`.
fn sign(d: f64) -> f64 {
    if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// log(cosh(t)), accurate for all magnitudes.
fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// log(sinh(t)) for t > 0, accurate for all magnitudes.
fn ln_sinh(t: f64) -> f64 {
    debug_assert!(t > 0.0);
    t + (-(-2.0 * t).exp()).ln_1p() - LN_2
}

/// Logistic slope sigma'(u) = 1 / (4 cosh^2(u/2)), evaluated without forming
/// sigma(u) itself.
fn logistic_slope(u: f64) -> f64 {
    0.25 * (-2.0 * ln_cosh(0.5 * u)).exp()
}

/// Vote value of `kind` for a sample at `x` against a bin centered at `mu`
/// with half-width `omega`. `param` is the kernel's shape parameter: the base
/// for histlayer, the tent slope for lbf, the Gaussian sharpness for rbf, the
/// bandwidth for kde.
pub fn vote(kind: KernelKind, x: f64, mu: f64, omega: f64, param: f64) -> f64 {
    match kind {
        KernelKind::HistLayer => histlayer_value(x, mu, omega, param),
        KernelKind::Lbf => lbf_value(x, mu, param),
        KernelKind::Rbf => rbf_value(x, mu, param),
        KernelKind::Kde => kde_value(x, mu, omega, param),
    }
}

/// Vote value plus exact partials. Same arguments as [`vote`].
pub fn vote_grad(kind: KernelKind, x: f64, mu: f64, omega: f64, param: f64) -> VoteGradient {
    match kind {
        KernelKind::HistLayer => histlayer_grad(x, mu, omega, param),
        KernelKind::Lbf => lbf_grad(x, mu, param),
        KernelKind::Rbf => rbf_grad(x, mu, param),
        KernelKind::Kde => kde_grad(x, mu, omega, param),
    }
}

fn histlayer_value(x: f64, mu: f64, omega: f64, base: f64) -> f64 {
    debug_assert!(base > 1.0);
    let t = omega - (x - mu).abs();
    if t <= 0.0 {
        return 0.0;
    }
    let pre = base.powf(t);
    if pre > 1.0 {
        pre
    } else {
        0.0
    }
}

fn histlayer_grad(x: f64, mu: f64, omega: f64, base: f64) -> VoteGradient {
    debug_assert!(base > 1.0);
    let d = x - mu;
    let t = omega - d.abs();
    if t <= 0.0 {
        return VoteGradient::ZERO;
    }
    let pre = base.powf(t);
    if pre <= 1.0 {
        // powf can round b^t down to exactly 1 for tiny positive t; the vote
        // is clipped there, so the derivative is zero as well.
        return VoteGradient::ZERO;
    }
    let ln_b = base.ln();
    let d_dx = -sign(d) * ln_b * pre;
    VoteGradient {
        value: pre,
        d_dx,
        d_dmu: -d_dx,
        d_domega: ln_b * pre,
        d_dparam: pre * t / base,
    }
}

fn lbf_value(x: f64, mu: f64, slope: f64) -> f64 {
    debug_assert!(slope > 0.0);
    let v = 1.0 - slope * (x - mu).abs();
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

fn lbf_grad(x: f64, mu: f64, slope: f64) -> VoteGradient {
    debug_assert!(slope > 0.0);
    let d = x - mu;
    let a = d.abs();
    let v = 1.0 - slope * a;
    if v <= 0.0 {
        return VoteGradient::ZERO;
    }
    let d_dx = -slope * sign(d);
    VoteGradient {
        value: v,
        d_dx,
        d_dmu: -d_dx,
        d_domega: 0.0,
        d_dparam: -a,
    }
}

fn rbf_value(x: f64, mu: f64, gamma: f64) -> f64 {
    debug_assert!(gamma > 0.0);
    let d = x - mu;
    (-gamma * gamma * d * d).exp()
}

fn rbf_grad(x: f64, mu: f64, gamma: f64) -> VoteGradient {
    debug_assert!(gamma > 0.0);
    let d = x - mu;
    let v = (-gamma * gamma * d * d).exp();
    let d_dx = -2.0 * gamma * gamma * d * v;
    VoteGradient {
        value: v,
        d_dx,
        d_dmu: -d_dx,
        d_domega: 0.0,
        d_dparam: -2.0 * gamma * d * d * v,
    }
}

// The kde vote is sigma((d + omega)/B) - sigma((d - omega)/B) with
// d = x - mu. Written that way, both sigmoids saturate toward 1 (or 0) for
// samples a few bandwidths outside the bin and the subtraction cancels,
// leaving noise where the tails should decay like e^(-|d|/B). The identity
//
//   sigma(a) - sigma(b) = sinh((a - b)/2) / (2 cosh(a/2) cosh(b/2))
//
// has no subtraction of near-equal terms, so the whole computation moves to
// log space and the tails stay accurate down to underflow.
fn kde_value(x: f64, mu: f64, omega: f64, bandwidth: f64) -> f64 {
    debug_assert!(bandwidth > 0.0);
    let d = x - mu;
    let u_hi = (d + omega) / bandwidth;
    let u_lo = (d - omega) / bandwidth;
    // The two ln_cosh terms swap roles under d -> -d; adding them before
    // subtracting keeps the expression exactly even in the offset.
    (ln_sinh(omega / bandwidth) - LN_2 - (ln_cosh(0.5 * u_hi) + ln_cosh(0.5 * u_lo))).exp()
}

fn kde_grad(x: f64, mu: f64, omega: f64, bandwidth: f64) -> VoteGradient {
    debug_assert!(bandwidth > 0.0);
    let d = x - mu;
    let b = bandwidth;
    let u_hi = (d + omega) / b;
    let u_lo = (d - omega) / b;
    let lc_hi = ln_cosh(0.5 * u_hi);
    let lc_lo = ln_cosh(0.5 * u_lo);
    let ls_half = ln_sinh(omega / b);
    // Grouping lc_hi + lc_lo keeps value and d_dx exactly even/odd in d,
    // matching kde_value's rounding.
    let value = (ls_half - LN_2 - (lc_hi + lc_lo)).exp();

    // d/dx = (sigma'(u_hi) - sigma'(u_lo)) / B. The same cancellation hides
    // here; the product form sinh(d/B) sinh(omega/B) / (4B cosh^2 cosh^2)
    // avoids it.
    let m = d / b;
    let d_dx = if m == 0.0 {
        0.0
    } else {
        -sign(m) * (ln_sinh(m.abs()) + ls_half - (4.0 * b).ln() - 2.0 * (lc_hi + lc_lo)).exp()
    };

    // Both slope terms are positive, so these two stay cancellation-free:
    // the omega partial adds them, and in the bandwidth partial the terms
    // differ by a factor around e^(2 omega / B) everywhere except the
    // genuine smooth zero crossing.
    let slope_hi = logistic_slope(u_hi);
    let slope_lo = logistic_slope(u_lo);
    let d_domega = (slope_hi + slope_lo) / b;
    let d_dparam = -(u_hi * slope_hi - u_lo * slope_lo) / b;

    VoteGradient {
        value,
        d_dx,
        d_dmu: -d_dx,
        d_domega,
        d_dparam,
    }
}

/// A kernel bound to a bin layout, with one resolved shape parameter per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundKernel {
    kind: KernelKind,
    bins: BinSpec,
    params: Vec<f64>,
}

impl BoundKernel {
    /// Bind `kind` to `bins` with default per-bin parameters:
    /// base 1.01 for histlayer, slope 1/(4 omega_k) for lbf,
    /// sqrt(ln 2)/omega_k for rbf (half-maximum at the bin edge), and
    /// bandwidth omega/2.5 for kde.
    pub fn with_defaults(kind: KernelKind, bins: &BinSpec) -> Result<Self> {
        Self::with_overrides(kind, bins, None, None)
    }

    /// Like [`BoundKernel::with_defaults`], but `base` replaces the
    /// histlayer base and `bandwidth` replaces the kde bandwidth. Overrides
    /// aimed at other kernel kinds are ignored.
    pub fn with_overrides(
        kind: KernelKind,
        bins: &BinSpec,
        base: Option<f64>,
        bandwidth: Option<f64>,
    ) -> Result<Self> {
        let params = match kind {
            KernelKind::HistLayer => vec![base.unwrap_or(DEFAULT_BASE); bins.len()],
            KernelKind::Lbf => bins.half_widths().iter().map(|om| 0.25 / om).collect(),
            KernelKind::Rbf => bins
                .half_widths()
                .iter()
                .map(|om| LN_2.sqrt() / om)
                .collect(),
            KernelKind::Kde => {
                let b = bandwidth.unwrap_or(bins.half_width(0) / 2.5);
                vec![b; bins.len()]
            }
        };
        Self::from_params(kind, bins, params)
    }

    /// Bind explicit per-bin parameters. Histlayer and kde share one
    /// parameter across all bins and reject mixed values; kde additionally
    /// requires uniform bins.
    pub fn from_params(kind: KernelKind, bins: &BinSpec, params: Vec<f64>) -> Result<Self> {
        if params.len() != bins.len() {
            return Err(Error::InvalidParameter(format!(
                "{} kernel parameters for {} bins",
                params.len(),
                bins.len()
            )));
        }
        for (k, &p) in params.iter().enumerate() {
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "kernel parameter for bin {k} must be finite and positive, got {p}"
                )));
            }
            if kind == KernelKind::HistLayer && p <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "histlayer base must exceed 1, got {p}"
                )));
            }
        }
        if matches!(kind, KernelKind::HistLayer | KernelKind::Kde)
            && params.windows(2).any(|w| w[0] != w[1])
        {
            return Err(Error::InvalidParameter(format!(
                "{kind} shares one parameter across bins"
            )));
        }
        if kind == KernelKind::Kde && !bins.is_uniform() {
            return Err(Error::InvalidParameter(
                "kde needs uniform bins: one bandwidth cannot serve mixed half-widths".into(),
            ));
        }
        Ok(Self {
            kind,
            bins: bins.clone(),
            params,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn bins(&self) -> &BinSpec {
        &self.bins
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Vote of bin `k` for a sample at `x`.
    pub fn vote(&self, k: usize, x: f64) -> f64 {
        vote(
            self.kind,
            x,
            self.bins.center(k),
            self.bins.half_width(k),
            self.params[k],
        )
    }

    /// Vote of bin `k` for a sample at `x`, with partials.
    pub fn vote_grad(&self, k: usize, x: f64) -> VoteGradient {
        vote_grad(
            self.kind,
            x,
            self.bins.center(k),
            self.bins.half_width(k),
            self.params[k],
        )
    }

    /// Accumulate votes over a batch. Per bin, samples are summed in batch
    /// order, so two runs over the same batch agree bit for bit.
    pub fn histogram(
        &self,
        samples: &SampleBatch,
        normalization: Normalization,
    ) -> Result<Histogram> {
        let mut values = vec![0.0f64; self.bins.len()];
        for &x in samples {
            for (k, acc) in values.iter_mut().enumerate() {
                *acc += self.vote(k, x);
            }
        }
        let hist = Histogram::new(self.bins.clone(), values, Normalization::Counts)?;
        match normalization {
            Normalization::Counts => Ok(hist),
            Normalization::Probability => hist.into_probability(samples.len()),
        }
    }
}
