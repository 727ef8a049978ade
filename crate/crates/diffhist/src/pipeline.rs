//! The histlayer vote factored into elementary layer operations.
//!
//! The fused kernel computes pool over samples of
//! clip(b^(omega_k - |x - mu_k|)) in one expression. This module builds the
//! same histogram from six primitive stages (two affine maps, an absolute
//! value, an exponentiation, a threshold, and a pooling reduction), the way
//! the vote would be assembled from stock neural-network layers, and checks
//! that the factored path reproduces the fused one exactly.

use crate::bins::BinSpec;
use crate::error::{Error, Result};
use crate::histogram::Normalization;
use crate::kernels::{BoundKernel, KernelKind};
use crate::samples::SampleBatch;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Sum,
    Average,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    /// Affine map per bin: x -> x - mu_k (unit weight, bias -mu_k).
    CenterShift { centers: Vec<f64> },
    /// Elementwise |t|.
    Absolute,
    /// Affine map per bin: t -> omega_k - t (weight -1, bias omega_k).
    NegatePlusWidth { half_widths: Vec<f64> },
    /// Elementwise b^t.
    ExponentiateBase { base: f64 },
    /// Elementwise clip: z if z > 1, else 0.
    ThresholdAtOne,
    /// Reduce over samples, per bin.
    Pool { kind: PoolKind },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::CenterShift { .. } => "center_shift",
            Stage::Absolute => "absolute",
            Stage::NegatePlusWidth { .. } => "negate_plus_width",
            Stage::ExponentiateBase { .. } => "exponentiate_base",
            Stage::ThresholdAtOne => "threshold_at_one",
            Stage::Pool {
                kind: PoolKind::Sum,
            } => "pool_sum",
            Stage::Pool {
                kind: PoolKind::Average,
            } => "pool_average",
        }
    }
}

/// Snapshot of one stage's output: the N x K matrix after an elementwise or
/// affine stage, or the length-K vector after pooling.
#[derive(Debug, Clone)]
pub struct StageTrace {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    /// Row-major; pooled output has rows = 1.
    pub data: Vec<f64>,
}

/// Callback fed each stage's output: name, rows, cols, row-major data.
type StageObserver<'a> = dyn FnMut(&'static str, usize, usize, &[f64]) + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    stages: Vec<Stage>,
}

impl Pipeline {
    /// The canonical six-stage factorization of the histlayer histogram.
    pub fn histlayer(bins: &BinSpec, base: f64, pool: PoolKind) -> Result<Self> {
        Self::from_stages(vec![
            Stage::CenterShift {
                centers: bins.centers().to_vec(),
            },
            Stage::Absolute,
            Stage::NegatePlusWidth {
                half_widths: bins.half_widths().to_vec(),
            },
            Stage::ExponentiateBase { base },
            Stage::ThresholdAtOne,
            Stage::Pool { kind: pool },
        ])
    }

    /// Validate an explicit stage list. The six stages must appear exactly
    /// once, in canonical order, with mutually consistent per-bin parameter
    /// lengths and a base above 1.
    pub fn from_stages(stages: Vec<Stage>) -> Result<Self> {
        let bad = |msg: String| Err(Error::BadPipeline(msg));
        if stages.len() != 6 {
            return bad(format!("expected 6 stages, got {}", stages.len()));
        }
        let expected = [
            "center_shift",
            "absolute",
            "negate_plus_width",
            "exponentiate_base",
            "threshold_at_one",
        ];
        for (stage, want) in stages.iter().zip(expected) {
            if stage.name() != want {
                return bad(format!(
                    "stage order: expected {want}, found {}",
                    stage.name()
                ));
            }
        }
        if !matches!(stages[5], Stage::Pool { .. }) {
            return bad(format!("final stage must pool, found {}", stages[5].name()));
        }
        let Stage::CenterShift { centers } = &stages[0] else {
            unreachable!("order checked above")
        };
        let Stage::NegatePlusWidth { half_widths } = &stages[2] else {
            unreachable!("order checked above")
        };
        let Stage::ExponentiateBase { base } = stages[3] else {
            unreachable!("order checked above")
        };
        if centers.is_empty() {
            return bad("center_shift needs at least one bin".into());
        }
        if centers.len() != half_widths.len() {
            return bad(format!(
                "{} centers but {} half-widths",
                centers.len(),
                half_widths.len()
            ));
        }
        if centers.iter().chain(half_widths).any(|v| !v.is_finite()) {
            return bad("non-finite stage parameter".into());
        }
        if !(base.is_finite() && base > 1.0) {
            return bad(format!("exponentiation base must exceed 1, got {base}"));
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    fn cols(&self) -> usize {
        let Stage::CenterShift { centers } = &self.stages[0] else {
            unreachable!("validated at construction")
        };
        centers.len()
    }

    /// Run the stages over a batch, producing one pooled value per bin.
    pub fn run(&self, samples: &SampleBatch) -> Vec<f64> {
        self.execute(samples, &mut |_, _, _, _| {})
    }

    /// Like [`Pipeline::run`], but also captures every stage's full output.
    pub fn trace(&self, samples: &SampleBatch) -> (Vec<f64>, Vec<StageTrace>) {
        let mut traces = Vec::with_capacity(self.stages.len());
        let pooled = self.execute(samples, &mut |name, rows, cols, data: &[f64]| {
            traces.push(StageTrace {
                name,
                rows,
                cols,
                data: data.to_vec(),
            });
        });
        (pooled, traces)
    }

    fn execute(&self, samples: &SampleBatch, observe: &mut StageObserver) -> Vec<f64> {
        let rows = samples.len();
        let cols = self.cols();
        let mut m = vec![0.0f64; rows * cols];
        let mut pooled: Vec<f64> = Vec::new();
        for stage in &self.stages {
            match stage {
                Stage::CenterShift { centers } => {
                    for (i, &x) in samples.iter().enumerate() {
                        for (k, &mu) in centers.iter().enumerate() {
                            m[i * cols + k] = x - mu;
                        }
                    }
                }
                Stage::Absolute => {
                    for v in &mut m {
                        *v = v.abs();
                    }
                }
                Stage::NegatePlusWidth { half_widths } => {
                    for i in 0..rows {
                        for (k, &om) in half_widths.iter().enumerate() {
                            let v = &mut m[i * cols + k];
                            *v = om - *v;
                        }
                    }
                }
                Stage::ExponentiateBase { base } => {
                    for v in &mut m {
                        let t = *v;
                        let z = base.powf(t);
                        // A vote can exceed 1 only strictly inside the bin,
                        // and inside the bin it never rounds below 1.
                        debug_assert!(z <= 1.0 || t > 0.0);
                        debug_assert!(t <= 0.0 || z >= 1.0);
                        *v = z;
                    }
                }
                Stage::ThresholdAtOne => {
                    for v in &mut m {
                        // Same comparison the fused kernel makes: anything
                        // not strictly above 1 votes 0.
                        *v = if *v > 1.0 { *v } else { 0.0 };
                    }
                }
                Stage::Pool { kind } => {
                    pooled = (0..cols)
                        .map(|k| {
                            // Ascending sample order: the exact accumulation
                            // sequence of the fused kernel path.
                            let mut acc = 0.0;
                            for i in 0..rows {
                                acc += m[i * cols + k];
                            }
                            match kind {
                                PoolKind::Sum => acc,
                                PoolKind::Average if rows == 0 => 0.0,
                                PoolKind::Average => acc / rows as f64,
                            }
                        })
                        .collect();
                    observe(stage.name(), 1, cols, &pooled);
                    continue;
                }
            }
            observe(stage.name(), rows, cols, &m);
        }
        pooled
    }
}

/// Result of running the factored and fused histlayer paths side by side.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EquivalenceReport {
    pub n_samples: usize,
    pub n_bins: usize,
    pub max_abs_discrepancy: f64,
    pub sum_abs_discrepancy: f64,
}

impl EquivalenceReport {
    /// Both paths evaluate the same real expression in the same order, so
    /// the allowance is pure paranoia scaled to the accumulation length.
    pub fn passes(&self) -> bool {
        self.max_abs_discrepancy <= 1e-12 * (self.n_samples as f64).max(1.0)
    }
}

/// Compare the staged histlayer histogram against the fused kernel path on
/// the same batch, counts scale.
pub fn pipeline_equivalence_check(
    samples: &SampleBatch,
    bins: &BinSpec,
    base: f64,
) -> Result<EquivalenceReport> {
    let staged = Pipeline::histlayer(bins, base, PoolKind::Sum)?.run(samples);
    let kernel = BoundKernel::from_params(KernelKind::HistLayer, bins, vec![base; bins.len()])?;
    let fused = kernel.histogram(samples, Normalization::Counts)?;
    let mut max_abs = 0.0f64;
    let mut sum_abs = 0.0f64;
    for (a, b) in staged.iter().zip(fused.values()) {
        let d = (a - b).abs();
        max_abs = max_abs.max(d);
        sum_abs += d;
    }
    Ok(EquivalenceReport {
        n_samples: samples.len(),
        n_bins: bins.len(),
        max_abs_discrepancy: max_abs,
        sum_abs_discrepancy: sum_abs,
    })
}
