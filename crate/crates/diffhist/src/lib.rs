//! Differentiable histograms over fixed bin layouts.
//!
//! A hard histogram counts samples per bin; the count is piecewise constant
//! in each sample, so nothing upstream of it can be trained by gradient
//! descent. This crate replaces the indicator with one of four smooth
//! per-bin voting kernels, each reporting its vote and the exact partial
//! derivatives with respect to the sample, the bin center, the bin
//! half-width, and its own shape parameter:
//!
//! - `histlayer`: a clipped exponential b^(omega - |x - mu|) that stays
//!   within a factor b^omega of the true count,
//! - `lbf`: a linear tent,
//! - `rbf`: a Gaussian bump,
//! - `kde`: a logistic-CDF window, evaluated in log space for stability.
//!
//! Around the kernels sit the pieces needed to use and trust them: exact
//! hard-counting oracles, approximation-error benchmarks, finite-difference
//! gradient verification, a staged tensor pipeline that must reproduce the
//! fused histlayer histogram bit for bit, a trainer that fits a generator
//! through the soft histogram, seeded synthetic data, and text/JSON io.

pub mod benchmark;
pub mod bins;
pub mod error;
pub mod gradcheck;
pub mod histogram;
pub mod io;
pub mod kernels;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod samples;
pub mod synth;
pub mod train;

pub use benchmark::{absolute_error, run_comparison, ComparisonReport, ErrorMetric, KernelRow};
pub use bins::{make_uniform_bins, BinSpec};
pub use error::{Error, Result};
pub use gradcheck::{check_kernel, CheckSettings, GradCheckReport};
pub use histogram::{mean_abs_distance, sum_abs_distance, Histogram, Normalization};
pub use kernels::{vote, vote_grad, BoundKernel, KernelKind, VoteGradient, DEFAULT_BASE};
pub use oracle::{hard_histogram, BoundaryMode};
pub use pipeline::{pipeline_equivalence_check, EquivalenceReport, Pipeline, PoolKind, Stage};
pub use samples::SampleBatch;
pub use synth::{synthesize, Distribution};
pub use train::{
    loss_and_gradient, train, Generator, Loss, OptimizerKind, TargetSpec, TrainConfig, TrainRecord,
    TrainTrace,
};
