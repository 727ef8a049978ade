//! `train`: fit a generator by gradient descent so the soft histogram of
//! its outputs matches a target, then report the loss curve endpoints, the
//! learned parameters, and the final histograms.
//!
//! The target is, in order of precedence: a histogram JSON file given with
//! `--target`, a named distribution given with `--target-dist` (at the
//! synth defaults), or the built-in affine pushforward recovery task.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use diffhist::train::TargetSpec;
use diffhist::{make_uniform_bins, train, Distribution, Generator, Histogram, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::common::{
    emit_json, file_defaults, DistArg, GeneratorArg, LossArg, OptimizerArg, Outcome, SoftKernel,
    SAMPLE_PRNG,
};

#[derive(Args)]
pub struct TrainArgs {
    /// JSON file with flat defaults for the flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Match a named distribution (at the synth defaults) instead of the
    /// built-in affine recovery target.
    #[arg(long = "target-dist", value_enum, conflicts_with = "target")]
    target_dist: Option<DistArg>,
    /// Match the histogram stored in this JSON file (as `hist` writes it,
    /// probability-normalized over the same bin layout).
    #[arg(long, value_name = "FILE")]
    target: Option<PathBuf>,
    /// Scale of the built-in affine pushforward target.
    #[arg(long = "target-scale")]
    target_scale: Option<f64>,
    /// Offset of the built-in affine pushforward target.
    #[arg(long = "target-offset")]
    target_offset: Option<f64>,
    /// Generator family.
    #[arg(long, value_enum)]
    generator: Option<GeneratorArg>,
    /// Hidden width of the mlp generator.
    #[arg(long)]
    hidden: Option<usize>,
    /// Soft kernel driving the training histogram.
    #[arg(long, value_enum)]
    kernel: Option<SoftKernel>,
    /// Training loss.
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    /// Parameter update rule.
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Gradient steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Seed for the noise batch; the target batch and mlp initialization
    /// derive their own streams from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Lower edge of the binned range.
    #[arg(long)]
    lo: Option<f64>,
    /// Upper edge of the binned range.
    #[arg(long)]
    hi: Option<f64>,
    /// Number of equal-width bins.
    #[arg(long)]
    bins: Option<usize>,
    /// Noise samples pushed through the generator each step.
    #[arg(long = "noise-n")]
    noise_n: Option<usize>,
    /// Histlayer exponential base (> 1).
    #[arg(long)]
    base: Option<f64>,
    /// Kde bandwidth (> 0).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Per-step CSV file (step,loss,grad_norm); skipped when omitted.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// JSON result file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct TrainFile {
    target_dist: Option<DistArg>,
    target: Option<PathBuf>,
    target_scale: Option<f64>,
    target_offset: Option<f64>,
    generator: Option<GeneratorArg>,
    hidden: Option<usize>,
    kernel: Option<SoftKernel>,
    loss: Option<LossArg>,
    optimizer: Option<OptimizerArg>,
    lr: Option<f64>,
    steps: Option<usize>,
    seed: Option<u64>,
    lo: Option<f64>,
    hi: Option<f64>,
    bins: Option<usize>,
    noise_n: Option<usize>,
    base: Option<f64>,
    bandwidth: Option<f64>,
    trace: Option<PathBuf>,
    out: Option<PathBuf>,
}

/// The fully resolved run, embedded in the result JSON. At most one of
/// `target_dist` and `target` is set; both null means the affine
/// pushforward task at `target_scale`/`target_offset`.
#[derive(Serialize)]
pub struct TrainRunConfig {
    command: &'static str,
    target_dist: Option<DistArg>,
    target: Option<PathBuf>,
    target_scale: f64,
    target_offset: f64,
    generator: GeneratorArg,
    hidden: usize,
    kernel: SoftKernel,
    loss: LossArg,
    optimizer: OptimizerArg,
    lr: f64,
    steps: usize,
    seed: u64,
    lo: f64,
    hi: f64,
    bins: usize,
    noise_n: usize,
    base: f64,
    bandwidth: f64,
    prng: &'static str,
    trace: Option<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct TrainOutput {
    config: TrainRunConfig,
    initial_loss: f64,
    final_loss: f64,
    initial_generator: Generator,
    final_generator: Generator,
    target: Histogram,
    initial_histogram: Histogram,
    final_histogram: Histogram,
    initial_histlayer_histogram: Histogram,
    final_histlayer_histogram: Histogram,
}

pub fn run(args: TrainArgs) -> Result<Outcome> {
    let file: TrainFile = file_defaults(args.config.as_ref())?;
    // An explicit target flag replaces the config file's whole target
    // choice, so a flag can never be merged against a conflicting file key.
    let (target_dist, target) = match (args.target_dist, args.target) {
        (None, None) => (file.target_dist, file.target),
        (dist, path) => (dist, path),
    };
    if target_dist.is_some() && target.is_some() {
        bail!("--target-dist and --target are mutually exclusive");
    }
    let lo = args.lo.or(file.lo).unwrap_or(-1.0);
    let hi = args.hi.or(file.hi).unwrap_or(1.0);
    let k = args.bins.or(file.bins).unwrap_or(20);
    let bins = make_uniform_bins(lo, hi, k)?;
    let cfg = TrainRunConfig {
        command: "train",
        target_dist,
        target,
        target_scale: args.target_scale.or(file.target_scale).unwrap_or(0.5),
        target_offset: args.target_offset.or(file.target_offset).unwrap_or(0.2),
        generator: args
            .generator
            .or(file.generator)
            .unwrap_or(GeneratorArg::Affine),
        hidden: args.hidden.or(file.hidden).unwrap_or(8),
        kernel: args.kernel.or(file.kernel).unwrap_or(SoftKernel::Kde),
        loss: args.loss.or(file.loss).unwrap_or(LossArg::L2),
        optimizer: args
            .optimizer
            .or(file.optimizer)
            .unwrap_or(OptimizerArg::Adam),
        lr: args.lr.or(file.lr).unwrap_or(0.02),
        steps: args.steps.or(file.steps).unwrap_or(2000),
        seed: args.seed.or(file.seed).unwrap_or(7),
        lo,
        hi,
        bins: k,
        noise_n: args.noise_n.or(file.noise_n).unwrap_or(2000),
        base: args.base.or(file.base).unwrap_or(diffhist::DEFAULT_BASE),
        bandwidth: args
            .bandwidth
            .or(file.bandwidth)
            .unwrap_or(bins.half_width(0) / 2.5),
        prng: SAMPLE_PRNG,
        trace: args.trace.or(file.trace),
        out: args.out.or(file.out),
    };

    let target_spec = match (&cfg.target_dist, &cfg.target) {
        (Some(dist), None) => TargetSpec::Distribution {
            distribution: dist_at_synth_defaults(*dist),
        },
        (None, Some(path)) => TargetSpec::Histogram {
            histogram: diffhist::io::read_json(path)
                .with_context(|| format!("loading --target {}", path.display()))?,
        },
        _ => TargetSpec::AffinePushforward {
            scale: cfg.target_scale,
            offset: cfg.target_offset,
        },
    };
    let generator = match cfg.generator {
        GeneratorArg::Affine => Generator::affine(1.0, 0.0),
        // Weight initialization gets its own stream, two away from the
        // noise stream (the target batch sits at seed + 1).
        GeneratorArg::Mlp => Generator::mlp_seeded(cfg.hidden, cfg.seed.wrapping_add(2))?,
    };
    let train_config = TrainConfig {
        bins,
        target: target_spec,
        generator,
        noise: Distribution::Uniform { lo: -1.0, hi: 1.0 },
        noise_n: cfg.noise_n,
        seed: cfg.seed,
        kernel: cfg.kernel.kind(),
        loss: cfg.loss.loss(),
        optimizer: cfg.optimizer.kind(),
        lr: cfg.lr,
        steps: cfg.steps,
        base: Some(cfg.base),
        bandwidth: Some(cfg.bandwidth),
    };
    let trace = train(&train_config)?;

    if let Some(path) = &cfg.trace {
        let mut table = String::from("step,loss,grad_norm\n");
        for record in &trace.records {
            writeln!(
                table,
                "{},{},{}",
                record.step, record.loss, record.grad_norm
            )
            .expect("writing to a String cannot fail");
        }
        diffhist::io::write_text_atomic(path, &table)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let output = TrainOutput {
        config: cfg,
        initial_loss: trace.records.first().expect("at least one record").loss,
        final_loss: trace.records.last().expect("at least one record").loss,
        initial_generator: trace.initial_generator,
        final_generator: trace.final_generator,
        target: trace.target,
        initial_histogram: trace.initial_histogram,
        final_histogram: trace.final_histogram,
        initial_histlayer_histogram: trace.initial_histlayer_histogram,
        final_histlayer_histogram: trace.final_histlayer_histogram,
    };
    emit_json(output.config.out.clone().as_ref(), &output)?;
    Ok(Outcome::Success)
}

/// The fixed parameterizations `synth` uses when none are given; custom
/// parameters go through `synth` + `hist` + `--target` instead.
fn dist_at_synth_defaults(dist: DistArg) -> Distribution {
    match dist {
        DistArg::Normal => Distribution::STANDARD_NORMAL,
        DistArg::Uniform => Distribution::Uniform { lo: -1.0, hi: 1.0 },
        DistArg::Bimodal => Distribution::Bimodal {
            mean1: -0.5,
            std1: 0.15,
            mean2: 0.5,
            std2: 0.15,
            mix: 0.5,
        },
    }
}
