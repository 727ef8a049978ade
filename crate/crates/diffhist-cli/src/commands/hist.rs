//! `hist`: bin a sample file with one soft kernel or the exact count, and
//! write the histogram as JSON with the effective config embedded.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use diffhist::{
    hard_histogram, make_uniform_bins, BoundKernel, BoundaryMode, Histogram, Normalization,
    DEFAULT_BASE,
};
use serde::{Deserialize, Serialize};

use crate::common::{emit_json, file_defaults, HistKernel, NormalizeArg, Outcome};

#[derive(Args)]
pub struct HistArgs {
    /// JSON file with flat defaults for the flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Input sample file: one value per line, '#' lines skipped.
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    /// Lower edge of the binned range.
    #[arg(long)]
    lo: Option<f64>,
    /// Upper edge of the binned range.
    #[arg(long)]
    hi: Option<f64>,
    /// Number of equal-width bins.
    #[arg(long)]
    bins: Option<usize>,
    /// Vote kernel, or `hard` for the exact count.
    #[arg(long, value_enum)]
    kernel: Option<HistKernel>,
    /// Histlayer exponential base (> 1).
    #[arg(long)]
    base: Option<f64>,
    /// Kde bandwidth (> 0).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Output scale.
    #[arg(long, value_enum)]
    normalize: Option<NormalizeArg>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct HistFile {
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    lo: Option<f64>,
    hi: Option<f64>,
    bins: Option<usize>,
    kernel: Option<HistKernel>,
    base: Option<f64>,
    bandwidth: Option<f64>,
    normalize: Option<NormalizeArg>,
    out: Option<PathBuf>,
}

/// The fully resolved run, embedded in the output JSON.
#[derive(Serialize)]
pub struct HistConfig {
    command: &'static str,
    #[serde(rename = "in")]
    input: PathBuf,
    lo: f64,
    hi: f64,
    bins: usize,
    kernel: HistKernel,
    base: f64,
    bandwidth: f64,
    normalize: NormalizeArg,
    out: Option<PathBuf>,
}

/// Output shape: the histogram itself plus everything needed to rerun it.
#[derive(Serialize)]
struct HistOutput {
    bins: BinsOut,
    values: Vec<f64>,
    normalization: Normalization,
    kernel: HistKernel,
    n_samples: usize,
    config: HistConfig,
}

#[derive(Serialize)]
struct BinsOut {
    centers: Vec<f64>,
    half_widths: Vec<f64>,
}

pub fn run(args: HistArgs) -> Result<Outcome> {
    let file: HistFile = file_defaults(args.config.as_ref())?;
    let input = args
        .input
        .or(file.input)
        .context("hist needs --in (or an `in` entry in --config)")?;
    let lo = args.lo.or(file.lo).unwrap_or(-1.0);
    let hi = args.hi.or(file.hi).unwrap_or(1.0);
    let k = args.bins.or(file.bins).unwrap_or(20);
    let bins = make_uniform_bins(lo, hi, k)?;
    let cfg = HistConfig {
        command: "hist",
        input,
        lo,
        hi,
        bins: k,
        kernel: args.kernel.or(file.kernel).unwrap_or(HistKernel::Histlayer),
        base: args.base.or(file.base).unwrap_or(DEFAULT_BASE),
        bandwidth: args
            .bandwidth
            .or(file.bandwidth)
            .unwrap_or(bins.half_width(0) / 2.5),
        normalize: args
            .normalize
            .or(file.normalize)
            .unwrap_or(NormalizeArg::Counts),
        out: args.out.or(file.out),
    };

    let samples = diffhist::io::read_samples(&cfg.input)?;
    let normalization = cfg.normalize.normalization();
    let histogram: Histogram = match cfg.kernel.soft() {
        Some(kind) => {
            BoundKernel::with_overrides(kind, &bins, Some(cfg.base), Some(cfg.bandwidth))?
                .histogram(&samples, normalization)?
        }
        None => hard_histogram(&bins, &samples, BoundaryMode::default(), normalization)?,
    };

    let output = HistOutput {
        bins: BinsOut {
            centers: bins.centers().to_vec(),
            half_widths: bins.half_widths().to_vec(),
        },
        values: histogram.values().to_vec(),
        normalization,
        kernel: cfg.kernel,
        n_samples: samples.len(),
        config: cfg,
    };
    emit_json(output.config.out.clone().as_ref(), &output)?;
    Ok(Outcome::Success)
}
