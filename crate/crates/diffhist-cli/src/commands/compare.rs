//! `compare`: score all four soft kernels against the exact count on one
//! batch, worst first, with an optional per-bin CSV table.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use diffhist::{
    make_uniform_bins, run_comparison, synthesize, BinSpec, ComparisonReport, Distribution,
    KernelKind, Normalization, DEFAULT_BASE,
};
use serde::{Deserialize, Serialize};

use crate::common::{emit_json, file_defaults, BoundaryArg, MetricArg, Outcome, SAMPLE_PRNG};

#[derive(Args)]
pub struct CompareArgs {
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
    /// Error metric.
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Oracle boundary rule.
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    /// Histlayer exponential base (> 1).
    #[arg(long)]
    base: Option<f64>,
    /// Kde bandwidth (> 0).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Batch size when --in is omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Synthesis seed when --in is omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON report file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Per-bin CSV table (bin_index,center,oracle,histlayer,lbf,rbf,kde).
    #[arg(long = "per-bin", value_name = "FILE")]
    per_bin: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct CompareFile {
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    lo: Option<f64>,
    hi: Option<f64>,
    bins: Option<usize>,
    metric: Option<MetricArg>,
    boundary: Option<BoundaryArg>,
    base: Option<f64>,
    bandwidth: Option<f64>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    per_bin: Option<PathBuf>,
}

/// The fully resolved run, embedded in the report.
#[derive(Serialize)]
pub struct CompareConfig {
    command: &'static str,
    #[serde(rename = "in")]
    input: Option<PathBuf>,
    lo: f64,
    hi: f64,
    bins: usize,
    metric: MetricArg,
    boundary: BoundaryArg,
    base: f64,
    bandwidth: f64,
    n: usize,
    seed: u64,
    prng: &'static str,
    out: Option<PathBuf>,
    per_bin: Option<PathBuf>,
}

#[derive(Serialize)]
struct CompareOutput {
    config: CompareConfig,
    #[serde(flatten)]
    report: ComparisonReport,
}

pub fn run(args: CompareArgs) -> Result<Outcome> {
    let file: CompareFile = file_defaults(args.config.as_ref())?;
    let lo = args.lo.or(file.lo).unwrap_or(-1.0);
    let hi = args.hi.or(file.hi).unwrap_or(1.0);
    let k = args.bins.or(file.bins).unwrap_or(20);
    let bins = make_uniform_bins(lo, hi, k)?;
    let cfg = CompareConfig {
        command: "compare",
        input: args.input.or(file.input),
        lo,
        hi,
        bins: k,
        metric: args.metric.or(file.metric).unwrap_or(MetricArg::SumAbs),
        boundary: args
            .boundary
            .or(file.boundary)
            .unwrap_or(BoundaryArg::RightOpen),
        base: args.base.or(file.base).unwrap_or(DEFAULT_BASE),
        bandwidth: args
            .bandwidth
            .or(file.bandwidth)
            .unwrap_or(bins.half_width(0) / 2.5),
        n: args.n.or(file.n).unwrap_or(10_000),
        seed: args.seed.or(file.seed).unwrap_or(42),
        prng: SAMPLE_PRNG,
        out: args.out.or(file.out),
        per_bin: args.per_bin.or(file.per_bin),
    };

    let samples = match &cfg.input {
        Some(path) => diffhist::io::read_samples(path)?,
        None => synthesize(&Distribution::STANDARD_NORMAL, cfg.n, cfg.seed)?,
    };
    let report = run_comparison(
        &samples,
        &bins,
        &KernelKind::ALL,
        cfg.boundary.mode(),
        Normalization::Probability,
        cfg.metric.metric(),
        Some(cfg.base),
        Some(cfg.bandwidth),
    )?;

    if let Some(path) = &cfg.per_bin {
        let table = per_bin_csv(&report, &bins);
        diffhist::io::write_text_atomic(path, &table)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let output = CompareOutput {
        config: cfg,
        report,
    };
    emit_json(output.config.out.clone().as_ref(), &output)?;
    Ok(Outcome::Success)
}

/// One CSV row per bin: the oracle and each kernel at the report's
/// normalization, in fixed column order regardless of the error ranking.
fn per_bin_csv(report: &ComparisonReport, bins: &BinSpec) -> String {
    let by_kind = |kind: KernelKind| -> &[f64] {
        report
            .rows
            .iter()
            .find(|row| row.kernel == kind)
            .expect("comparison ran all four kernels")
            .histogram
            .values()
    };
    let histlayer = by_kind(KernelKind::HistLayer);
    let lbf = by_kind(KernelKind::Lbf);
    let rbf = by_kind(KernelKind::Rbf);
    let kde = by_kind(KernelKind::Kde);
    let oracle = report.oracle.values();

    let mut table = String::from("bin_index,center,oracle,histlayer,lbf,rbf,kde\n");
    for k in 0..bins.len() {
        writeln!(
            table,
            "{},{},{},{},{},{},{}",
            k,
            bins.center(k),
            oracle[k],
            histlayer[k],
            lbf[k],
            rbf[k],
            kde[k]
        )
        .expect("writing to a String cannot fail");
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_bin_table_has_fixed_columns_and_one_row_per_bin() {
        let bins = make_uniform_bins(-1.0, 1.0, 5).unwrap();
        let samples = synthesize(&Distribution::STANDARD_NORMAL, 500, 3).unwrap();
        let report = run_comparison(
            &samples,
            &bins,
            &KernelKind::ALL,
            diffhist::BoundaryMode::RightOpenEdges,
            Normalization::Probability,
            diffhist::ErrorMetric::SumAbs,
            None,
            None,
        )
        .unwrap();
        let table = per_bin_csv(&report, &bins);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "bin_index,center,oracle,histlayer,lbf,rbf,kde");
        assert_eq!(lines.len(), 1 + bins.len());
        assert!(lines[1].starts_with("0,"));
        assert_eq!(lines[1].split(',').count(), 7);
    }
}
