//! `synth`: draw a seeded batch from a named distribution and write it as
//! plain text, one value per line, under a one-line `#` config header.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use diffhist::{synthesize, Distribution};
use serde::{Deserialize, Serialize};

use crate::common::{file_defaults, DistArg, Outcome, SAMPLE_PRNG};

#[derive(Args)]
pub struct SynthArgs {
    /// JSON file with flat defaults for the flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Sampling distribution.
    #[arg(long, value_enum)]
    dist: Option<DistArg>,
    /// Normal mean.
    #[arg(long)]
    mean: Option<f64>,
    /// Normal standard deviation.
    #[arg(long)]
    std: Option<f64>,
    /// Uniform lower edge.
    #[arg(long)]
    lo: Option<f64>,
    /// Uniform upper edge.
    #[arg(long)]
    hi: Option<f64>,
    /// First bimodal component mean.
    #[arg(long)]
    mean1: Option<f64>,
    /// First bimodal component standard deviation.
    #[arg(long)]
    std1: Option<f64>,
    /// Second bimodal component mean.
    #[arg(long)]
    mean2: Option<f64>,
    /// Second bimodal component standard deviation.
    #[arg(long)]
    std2: Option<f64>,
    /// Weight of the first bimodal component, in [0, 1].
    #[arg(long)]
    mix: Option<f64>,
    /// Number of samples.
    #[arg(long)]
    n: Option<usize>,
    /// PRNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Partial mirror of [`SynthConfig`], as `--config` files supply it.
#[derive(Default, Deserialize)]
#[serde(default)]
struct SynthFile {
    dist: Option<DistArg>,
    mean: Option<f64>,
    std: Option<f64>,
    lo: Option<f64>,
    hi: Option<f64>,
    mean1: Option<f64>,
    std1: Option<f64>,
    mean2: Option<f64>,
    std2: Option<f64>,
    mix: Option<f64>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

/// The fully resolved run, echoed as the output header so the file can be
/// regenerated from itself.
#[derive(Serialize)]
pub struct SynthConfig {
    command: &'static str,
    dist: DistArg,
    mean: f64,
    std: f64,
    lo: f64,
    hi: f64,
    mean1: f64,
    std1: f64,
    mean2: f64,
    std2: f64,
    mix: f64,
    n: usize,
    seed: u64,
    prng: &'static str,
    out: Option<PathBuf>,
}

impl SynthConfig {
    fn resolve(args: SynthArgs, file: SynthFile) -> SynthConfig {
        SynthConfig {
            command: "synth",
            dist: args.dist.or(file.dist).unwrap_or(DistArg::Normal),
            mean: args.mean.or(file.mean).unwrap_or(0.0),
            std: args.std.or(file.std).unwrap_or(1.0),
            lo: args.lo.or(file.lo).unwrap_or(-1.0),
            hi: args.hi.or(file.hi).unwrap_or(1.0),
            mean1: args.mean1.or(file.mean1).unwrap_or(-0.5),
            std1: args.std1.or(file.std1).unwrap_or(0.15),
            mean2: args.mean2.or(file.mean2).unwrap_or(0.5),
            std2: args.std2.or(file.std2).unwrap_or(0.15),
            mix: args.mix.or(file.mix).unwrap_or(0.5),
            n: args.n.or(file.n).unwrap_or(10_000),
            seed: args.seed.or(file.seed).unwrap_or(42),
            prng: SAMPLE_PRNG,
            out: args.out.or(file.out),
        }
    }

    fn distribution(&self) -> Distribution {
        match self.dist {
            DistArg::Normal => Distribution::Normal {
                mean: self.mean,
                std: self.std,
            },
            DistArg::Uniform => Distribution::Uniform {
                lo: self.lo,
                hi: self.hi,
            },
            DistArg::Bimodal => Distribution::Bimodal {
                mean1: self.mean1,
                std1: self.std1,
                mean2: self.mean2,
                std2: self.std2,
                mix: self.mix,
            },
        }
    }
}

pub fn run(args: SynthArgs) -> Result<Outcome> {
    let file: SynthFile = file_defaults(args.config.as_ref())?;
    let cfg = SynthConfig::resolve(args, file);
    let samples = synthesize(&cfg.distribution(), cfg.n, cfg.seed)?;
    let header = serde_json::to_string(&cfg)?;
    match &cfg.out {
        Some(path) => diffhist::io::write_samples(path, &samples, Some(&header))
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            println!("# {header}");
            for value in &samples {
                println!("{value}");
            }
        }
    }
    Ok(Outcome::Success)
}
