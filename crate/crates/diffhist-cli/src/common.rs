//! Flag vocabularies, config-file loading, and output plumbing shared by
//! the subcommands.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::ValueEnum;
use diffhist::{BoundaryMode, ErrorMetric, KernelKind, Loss, Normalization, OptimizerKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// How sample batches are drawn everywhere in this binary: a SplitMix64
/// stream feeding Box-Muller for the normal components.
pub const SAMPLE_PRNG: &str = "splitmix64+box-muller";
/// The jitter source behind the gradcheck probe plan.
pub const PLAN_PRNG: &str = "splitmix64";

/// What a finished command reports back to `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The command ran to completion but a certified threshold failed;
    /// mapped to exit code 2 so CI can tell it apart from a usage error.
    ThresholdExceeded,
}

/// Load `--config` as partial defaults, or start from all-unset.
pub fn file_defaults<T: DeserializeOwned + Default>(config: Option<&PathBuf>) -> Result<T> {
    match config {
        Some(path) => diffhist::io::read_json(path)
            .with_context(|| format!("loading --config {}", path.display())),
        None => Ok(T::default()),
    }
}

/// Write pretty JSON to `out` atomically, or to stdout when no path is
/// given.
pub fn emit_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<()> {
    match out {
        Some(path) => diffhist::io::write_json_atomic(path, value)
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{}", serde_json::to_string_pretty(value)?),
    }
    Ok(())
}

/// Vote kernels plus the exact count, as `hist --kernel` accepts them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistKernel {
    Histlayer,
    Lbf,
    Rbf,
    Kde,
    Hard,
}

impl HistKernel {
    /// The library kernel behind this choice; `None` for the hard count.
    pub fn soft(self) -> Option<KernelKind> {
        match self {
            HistKernel::Histlayer => Some(KernelKind::HistLayer),
            HistKernel::Lbf => Some(KernelKind::Lbf),
            HistKernel::Rbf => Some(KernelKind::Rbf),
            HistKernel::Kde => Some(KernelKind::Kde),
            HistKernel::Hard => None,
        }
    }
}

/// Soft kernels only, for commands where the hard count is not a choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftKernel {
    Histlayer,
    Lbf,
    Rbf,
    Kde,
}

impl SoftKernel {
    pub fn kind(self) -> KernelKind {
        match self {
            SoftKernel::Histlayer => KernelKind::HistLayer,
            SoftKernel::Lbf => KernelKind::Lbf,
            SoftKernel::Rbf => KernelKind::Rbf,
            SoftKernel::Kde => KernelKind::Kde,
        }
    }
}

/// Oracle boundary rule for hard counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryArg {
    /// Strict interior |x - mu| < omega, per bin.
    Open,
    /// Half-open edge intervals; the last bin also takes its right edge.
    #[value(name = "right_open")]
    RightOpen,
}

impl BoundaryArg {
    pub fn mode(self) -> BoundaryMode {
        match self {
            BoundaryArg::Open => BoundaryMode::OpenInterval,
            BoundaryArg::RightOpen => BoundaryMode::RightOpenEdges,
        }
    }
}

/// Benchmark error metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    #[value(name = "sum_abs")]
    SumAbs,
    #[value(name = "mean_abs")]
    MeanAbs,
}

impl MetricArg {
    pub fn metric(self) -> ErrorMetric {
        match self {
            MetricArg::SumAbs => ErrorMetric::SumAbs,
            MetricArg::MeanAbs => ErrorMetric::MeanAbs,
        }
    }
}

/// Histogram output scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeArg {
    Counts,
    Probability,
}

impl NormalizeArg {
    pub fn normalization(self) -> Normalization {
        match self {
            NormalizeArg::Counts => Normalization::Counts,
            NormalizeArg::Probability => Normalization::Probability,
        }
    }
}

/// Named sampling distributions at their standard parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistArg {
    Normal,
    Uniform,
    Bimodal,
}

/// Training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossArg {
    L2,
    L1,
}

impl LossArg {
    pub fn loss(self) -> Loss {
        match self {
            LossArg::L2 => Loss::L2,
            LossArg::L1 => Loss::L1,
        }
    }
}

/// Training optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

impl OptimizerArg {
    pub fn kind(self) -> OptimizerKind {
        match self {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        }
    }
}

/// Trainable generator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorArg {
    Affine,
    Mlp,
}
