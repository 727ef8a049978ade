//! `decompose-check`: run the staged shift/abs/exponentiate/threshold/pool
//! pipeline and the fused histlayer histogram on the same batch, and exit 2
//! if they disagree beyond the threshold.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use diffhist::{
    make_uniform_bins, pipeline_equivalence_check, synthesize, Distribution, EquivalenceReport,
    DEFAULT_BASE,
};
use serde::{Deserialize, Serialize};

use crate::common::{emit_json, file_defaults, Outcome, SAMPLE_PRNG};

#[derive(Args)]
pub struct DecomposeArgs {
    /// JSON file with flat defaults for the flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Input sample file; a seeded standard-normal batch when omitted.
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
    /// Histlayer exponential base (> 1).
    #[arg(long)]
    base: Option<f64>,
    /// Batch size when --in is omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Synthesis seed when --in is omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Largest allowed per-bin discrepancy; 1e-12 per sample when omitted.
    #[arg(long)]
    threshold: Option<f64>,
    /// JSON report file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct DecomposeFile {
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    lo: Option<f64>,
    hi: Option<f64>,
    bins: Option<usize>,
    base: Option<f64>,
    n: Option<usize>,
    seed: Option<u64>,
    threshold: Option<f64>,
    out: Option<PathBuf>,
}

/// The fully resolved run, embedded in the report. A null threshold means
/// the per-sample default was applied.
#[derive(Serialize)]
pub struct DecomposeConfig {
    command: &'static str,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    lo: f64,
    hi: f64,
    bins: usize,
    base: f64,
    n: usize,
    seed: u64,
    threshold: Option<f64>,
    prng: &'static str,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DecomposeOutput {
    config: DecomposeConfig,
    threshold: f64,
    passed: bool,
    #[serde(flatten)]
    report: EquivalenceReport,
}

pub fn run(args: DecomposeArgs) -> Result<Outcome> {
    let file: DecomposeFile = file_defaults(args.config.as_ref())?;
    let cfg = DecomposeConfig {
        command: "decompose-check",
        input: args.input.or(file.input),
        lo: args.lo.or(file.lo).unwrap_or(-1.0),
        hi: args.hi.or(file.hi).unwrap_or(1.0),
        bins: args.bins.or(file.bins).unwrap_or(20),
        base: args.base.or(file.base).unwrap_or(DEFAULT_BASE),
        n: args.n.or(file.n).unwrap_or(10_000),
        seed: args.seed.or(file.seed).unwrap_or(42),
        threshold: args.threshold.or(file.threshold),
        prng: SAMPLE_PRNG,
        out: args.out.or(file.out),
    };

    let bins = make_uniform_bins(cfg.lo, cfg.hi, cfg.bins)?;
    let samples = match &cfg.input {
        Some(path) => diffhist::io::read_samples(path)?,
        None => synthesize(&Distribution::STANDARD_NORMAL, cfg.n, cfg.seed)?,
    };
    let report = pipeline_equivalence_check(&samples, &bins, cfg.base)?;
    let threshold = cfg
        .threshold
        .unwrap_or(1e-12 * (report.n_samples as f64).max(1.0));
    let passed = report.max_abs_discrepancy <= threshold;

    let output = DecomposeOutput {
        config: cfg,
        threshold,
        passed,
        report,
    };
    emit_json(output.config.out.clone().as_ref(), &output)?;
    if passed {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::ThresholdExceeded)
    }
}
