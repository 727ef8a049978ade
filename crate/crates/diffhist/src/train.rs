//! Gradient-based fitting of a scalar generator so that the soft histogram
//! of its outputs matches a target histogram.
//!
//! The full chain is: noise z -> generator y(z; theta) -> per-bin kernel
//! votes -> probability-scale histogram h -> scalar loss against the target.
//! Every stage is differentiable, so the parameter gradient is
//!
//!   dL/dtheta_j = sum_i [ sum_k dL/dh_k * dh_k/dy_i ] * dy_i/dtheta_j
//!
//! with dh_k/dy_i the kernel's input derivative divided by the batch size.
//! The hard histogram of the same outputs is tracked alongside as the
//! non-differentiable quantity the soft one stands in for.

use serde::{Deserialize, Serialize};

use crate::bins::{make_uniform_bins, BinSpec};
use crate::error::{Error, Result};
use crate::histogram::{Histogram, Normalization};
use crate::kernels::{BoundKernel, KernelKind};
use crate::oracle::{hard_histogram, BoundaryMode};
use crate::rng::SplitMix64;
use crate::samples::SampleBatch;
use crate::synth::{synthesize, Distribution};

/// Sample count used to render a `TargetSpec::Distribution` into a fixed
/// histogram. Large enough that target sampling noise sits well below the
/// kernel approximation error being optimized.
pub const TARGET_DISTRIBUTION_SAMPLES: usize = 200_000;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// A scalar function y(z; theta) whose parameters the trainer adjusts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// y = scale * z + offset.
    Affine { scale: f64, offset: f64 },
    /// One hidden tanh layer: y = sum_j w2[j] * tanh(w1[j] * z + b1[j]) + b2.
    Mlp {
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: f64,
    },
}

impl Generator {
    pub fn affine(scale: f64, offset: f64) -> Self {
        Generator::Affine { scale, offset }
    }

    /// Fresh one-hidden-layer network with all parameters drawn uniformly
    /// from [-0.5, 0.5), in parameter-packing order.
    pub fn mlp_seeded(hidden: usize, seed: u64) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::InvalidParameter(
                "mlp generator needs at least one hidden unit".into(),
            ));
        }
        let mut rng = SplitMix64::new(seed);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.next_f64() - 0.5).collect() };
        let w1 = draw(hidden);
        let b1 = draw(hidden);
        let w2 = draw(hidden);
        let b2 = draw(1)[0];
        Ok(Generator::Mlp { w1, b1, w2, b2 })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Generator::Affine { scale, offset } => {
                if !scale.is_finite() || !offset.is_finite() {
                    return Err(Error::InvalidParameter(
                        "affine generator parameters must be finite".into(),
                    ));
                }
            }
            Generator::Mlp { w1, b1, w2, b2 } => {
                if w1.is_empty() || w1.len() != b1.len() || w1.len() != w2.len() {
                    return Err(Error::InvalidParameter(format!(
                        "mlp layer sizes disagree: w1={}, b1={}, w2={}",
                        w1.len(),
                        b1.len(),
                        w2.len()
                    )));
                }
                let all = w1.iter().chain(b1).chain(w2).chain(std::iter::once(b2));
                if all.into_iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "mlp generator parameters must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        match self {
            Generator::Affine { .. } => 2,
            Generator::Mlp { w1, .. } => 3 * w1.len() + 1,
        }
    }

    /// Flatten parameters: affine packs [scale, offset]; mlp packs
    /// w1, then b1, then w2, then b2.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Generator::Affine { scale, offset } => vec![*scale, *offset],
            Generator::Mlp { w1, b1, w2, b2 } => {
                let mut out = Vec::with_capacity(3 * w1.len() + 1);
                out.extend_from_slice(w1);
                out.extend_from_slice(b1);
                out.extend_from_slice(w2);
                out.push(*b2);
                out
            }
        }
    }

    /// Overwrite parameters from the packing produced by `params`.
    pub fn set_params(&mut self, packed: &[f64]) -> Result<()> {
        if packed.len() != self.param_count() {
            return Err(Error::InvalidParameter(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                packed.len()
            )));
        }
        match self {
            Generator::Affine { scale, offset } => {
                *scale = packed[0];
                *offset = packed[1];
            }
            Generator::Mlp { w1, b1, w2, b2 } => {
                let h = w1.len();
                w1.copy_from_slice(&packed[..h]);
                b1.copy_from_slice(&packed[h..2 * h]);
                w2.copy_from_slice(&packed[2 * h..3 * h]);
                *b2 = packed[3 * h];
            }
        }
        Ok(())
    }

    pub fn forward(&self, z: f64) -> f64 {
        match self {
            Generator::Affine { scale, offset } => scale * z + offset,
            Generator::Mlp { w1, b1, w2, b2 } => {
                let mut y = *b2;
                for j in 0..w1.len() {
                    y += w2[j] * (w1[j] * z + b1[j]).tanh();
                }
                y
            }
        }
    }

    /// Forward pass that also fills `grad` with dy/dtheta in packing order.
    /// `grad` must have length `param_count()`.
    pub fn forward_grad(&self, z: f64, grad: &mut [f64]) -> f64 {
        debug_assert_eq!(grad.len(), self.param_count());
        match self {
            Generator::Affine { scale, offset } => {
                grad[0] = z;
                grad[1] = 1.0;
                scale * z + offset
            }
            Generator::Mlp { w1, b1, w2, b2 } => {
                let h = w1.len();
                let mut y = *b2;
                for j in 0..h {
                    let a = (w1[j] * z + b1[j]).tanh();
                    let slope = w2[j] * (1.0 - a * a);
                    grad[j] = slope * z;
                    grad[h + j] = slope;
                    grad[2 * h + j] = a;
                    y += w2[j] * a;
                }
                grad[3 * h] = 1.0;
                y
            }
        }
    }
}

/// What the trained histogram should look like.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    /// A literal probability histogram over the training bins.
    Histogram { histogram: Histogram },
    /// Hard-binned probability histogram of a large fresh batch from this
    /// distribution, drawn at `seed + 1` so it never aliases the noise.
    Distribution { distribution: Distribution },
    /// Hard-binned histogram of scale * z + offset over the same noise batch
    /// the trainer uses, making an exact recovery possible.
    AffinePushforward { scale: f64, offset: f64 },
}

/// How the loss compares the soft histogram to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Sum of squared per-bin differences.
    #[default]
    L2,
    /// Sum of absolute per-bin differences; subgradient 0 at ties.
    L1,
}

impl Loss {
    /// Loss value and dL/dh. Panics if the slices have different lengths.
    pub fn value_and_grad(&self, hist: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(hist.len(), target.len(), "histogram/target length mismatch");
        let mut value = 0.0;
        let mut grad = Vec::with_capacity(hist.len());
        for (h, t) in hist.iter().zip(target) {
            let d = h - t;
            match self {
                Loss::L2 => {
                    value += d * d;
                    grad.push(2.0 * d);
                }
                Loss::L1 => {
                    value += d.abs();
                    grad.push(if d > 0.0 {
                        1.0
                    } else if d < 0.0 {
                        -1.0
                    } else {
                        0.0
                    });
                }
            }
        }
        (value, grad)
    }
}

impl std::fmt::Display for Loss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Loss::L2 => write!(f, "l2"),
            Loss::L1 => write!(f, "l1"),
        }
    }
}

impl std::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Loss::L2),
            "l1" => Ok(Loss::L1),
            other => Err(Error::InvalidParameter(format!(
                "unknown loss {other:?}, expected l2 or l1"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptimizerKind::Adam => write!(f, "adam"),
            OptimizerKind::Sgd => write!(f, "sgd"),
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(Error::InvalidParameter(format!(
                "unknown optimizer {other:?}, expected adam or sgd"
            ))),
        }
    }
}

/// Full description of a training run. Everything downstream (noise batch,
/// target, kernel parameters, optimizer trajectory) is a pure function of
/// this value, so reruns are bitwise reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub bins: BinSpec,
    pub target: TargetSpec,
    #[serde(default = "default_generator")]
    pub generator: Generator,
    #[serde(default = "default_noise")]
    pub noise: Distribution,
    #[serde(default = "default_noise_n")]
    pub noise_n: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_kernel")]
    pub kernel: KernelKind,
    #[serde(default)]
    pub loss: Loss,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Override for the histlayer exponent base, where applicable.
    #[serde(default)]
    pub base: Option<f64>,
    /// Override for the kde bandwidth, where applicable.
    #[serde(default)]
    pub bandwidth: Option<f64>,
}

fn default_generator() -> Generator {
    Generator::affine(1.0, 0.0)
}

fn default_noise() -> Distribution {
    Distribution::Uniform { lo: -1.0, hi: 1.0 }
}

fn default_noise_n() -> usize {
    2000
}

fn default_seed() -> u64 {
    7
}

fn default_kernel() -> KernelKind {
    KernelKind::Kde
}

fn default_lr() -> f64 {
    0.02
}

fn default_steps() -> usize {
    2000
}

impl TrainConfig {
    pub fn new(bins: BinSpec, target: TargetSpec) -> Self {
        TrainConfig {
            bins,
            target,
            generator: default_generator(),
            noise: default_noise(),
            noise_n: default_noise_n(),
            seed: default_seed(),
            kernel: default_kernel(),
            loss: Loss::default(),
            optimizer: OptimizerKind::default(),
            lr: default_lr(),
            steps: default_steps(),
            base: None,
            bandwidth: None,
        }
    }

    /// The reference task: start at the identity map y = z and recover the
    /// affine map y = 0.5 z + 0.2 from its own pushforward histogram.
    pub fn affine_recovery() -> Self {
        let bins = make_uniform_bins(-1.0, 1.0, 20).expect("constant bin layout is valid");
        TrainConfig::new(
            bins,
            TargetSpec::AffinePushforward {
                scale: 0.5,
                offset: 0.2,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_n == 0 {
            return Err(Error::InvalidParameter(
                "training needs at least one noise sample".into(),
            ));
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be finite and non-negative, got {}",
                self.lr
            )));
        }
        self.noise.validate()?;
        self.generator.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub step: usize,
    pub loss: f64,
    pub grad_norm: f64,
}

/// Everything a finished run produced: the per-step curve, the generators at
/// both ends, and histogram snapshots under the training kernel and under
/// the histlayer kernel.
#[derive(Debug, Clone, Serialize)]
pub struct TrainTrace {
    pub records: Vec<TrainRecord>,
    pub initial_generator: Generator,
    pub final_generator: Generator,
    pub target: Histogram,
    pub initial_histogram: Histogram,
    pub final_histogram: Histogram,
    pub initial_histlayer_histogram: Histogram,
    pub final_histlayer_histogram: Histogram,
}

struct EvalOut {
    loss: f64,
    grad: Vec<f64>,
    hist: Vec<f64>,
    outputs: Vec<f64>,
}

struct TrainContext {
    noise: Vec<f64>,
    target: Histogram,
    kernel: BoundKernel,
    histlayer: BoundKernel,
    loss: Loss,
}

impl TrainContext {
    fn prepare(config: &TrainConfig) -> Result<Self> {
        let noise = synthesize(&config.noise, config.noise_n, config.seed)?;
        let kernel = BoundKernel::with_overrides(
            config.kernel,
            &config.bins,
            config.base,
            config.bandwidth,
        )?;
        let histlayer =
            BoundKernel::with_overrides(KernelKind::HistLayer, &config.bins, config.base, None)?;
        let target = resolve_target(config, noise.as_slice())?;
        Ok(TrainContext {
            noise: noise.as_slice().to_vec(),
            target,
            kernel,
            histlayer,
            loss: config.loss,
        })
    }

    /// One forward/backward pass at the given parameters. The generator
    /// outputs are raw values, not a validated batch: a diverging run shows
    /// up here as a training error tagged with the step, not a sample error.
    fn evaluate(&self, generator: &Generator, step: usize) -> Result<EvalOut> {
        let n = self.noise.len();
        let k = self.kernel.bins().len();
        let p = generator.param_count();
        let mut outputs = vec![0.0; n];
        let mut dydtheta = vec![0.0; n * p];
        for (i, &z) in self.noise.iter().enumerate() {
            let y = generator.forward_grad(z, &mut dydtheta[i * p..(i + 1) * p]);
            if !y.is_finite() {
                return Err(Error::NonFiniteTraining {
                    step,
                    detail: format!("generator output {y} at sample {i}"),
                });
            }
            outputs[i] = y;
        }

        let nf = n as f64;
        let mut hist = vec![0.0; k];
        let mut dhist_dy = vec![0.0; n * k];
        for (i, &y) in outputs.iter().enumerate() {
            for bin in 0..k {
                let g = self.kernel.vote_grad(bin, y);
                hist[bin] += g.value;
                dhist_dy[i * k + bin] = g.d_dx;
            }
        }
        for v in &mut hist {
            *v /= nf;
        }

        let (loss, dl_dh) = self.loss.value_and_grad(&hist, self.target.values());
        if !loss.is_finite() {
            return Err(Error::NonFiniteTraining {
                step,
                detail: format!("loss became {loss}"),
            });
        }

        let mut grad = vec![0.0; p];
        for i in 0..n {
            let mut w = 0.0;
            for bin in 0..k {
                w += dl_dh[bin] * dhist_dy[i * k + bin];
            }
            w /= nf;
            for j in 0..p {
                grad[j] += w * dydtheta[i * p + j];
            }
        }
        if let Some(bad) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteTraining {
                step,
                detail: format!("gradient component {bad} became {}", grad[bad]),
            });
        }

        Ok(EvalOut {
            loss,
            grad,
            hist,
            outputs,
        })
    }

    fn snapshot(&self, hist: &[f64]) -> Result<Histogram> {
        Histogram::new(
            self.kernel.bins().clone(),
            hist.to_vec(),
            Normalization::Probability,
        )
    }

    fn histlayer_snapshot(&self, outputs: &[f64]) -> Result<Histogram> {
        let n = outputs.len() as f64;
        let k = self.histlayer.bins().len();
        let mut hist = vec![0.0; k];
        for &y in outputs {
            for (bin, slot) in hist.iter_mut().enumerate().take(k) {
                *slot += self.histlayer.vote(bin, y);
            }
        }
        for v in &mut hist {
            *v /= n;
        }
        Histogram::new(
            self.histlayer.bins().clone(),
            hist,
            Normalization::Probability,
        )
    }
}

fn resolve_target(config: &TrainConfig, noise: &[f64]) -> Result<Histogram> {
    match &config.target {
        TargetSpec::Histogram { histogram } => {
            if histogram.normalization() != Normalization::Probability {
                return Err(Error::InvalidParameter(
                    "target histogram must be on probability scale".into(),
                ));
            }
            if histogram.bins() != &config.bins {
                return Err(Error::InvalidParameter(
                    "target histogram bins differ from the training bins".into(),
                ));
            }
            if histogram.sum() > 1.0 + 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "target histogram mass {} exceeds 1",
                    histogram.sum()
                )));
            }
            Ok(histogram.clone())
        }
        TargetSpec::Distribution { distribution } => {
            let batch = synthesize(
                distribution,
                TARGET_DISTRIBUTION_SAMPLES,
                config.seed.wrapping_add(1),
            )?;
            hard_histogram(
                &config.bins,
                &batch,
                BoundaryMode::RightOpenEdges,
                Normalization::Probability,
            )
        }
        TargetSpec::AffinePushforward { scale, offset } => {
            if !scale.is_finite() || !offset.is_finite() {
                return Err(Error::InvalidParameter(
                    "affine pushforward target parameters must be finite".into(),
                ));
            }
            let mapped: Vec<f64> = noise.iter().map(|z| scale * z + offset).collect();
            let batch = SampleBatch::new(mapped)?;
            hard_histogram(
                &config.bins,
                &batch,
                BoundaryMode::RightOpenEdges,
                Normalization::Probability,
            )
        }
    }
}

enum OptState {
    Sgd,
    Adam { m: Vec<f64>, v: Vec<f64> },
}

impl OptState {
    fn new(kind: OptimizerKind, params: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => OptState::Sgd,
            OptimizerKind::Adam => OptState::Adam {
                m: vec![0.0; params],
                v: vec![0.0; params],
            },
        }
    }

    fn apply(&mut self, params: &mut [f64], grad: &[f64], step: usize, lr: f64) {
        match self {
            OptState::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptState::Adam { m, v } => {
                let t = (step + 1) as i32;
                let m_corr = 1.0 - ADAM_BETA1.powi(t);
                let v_corr = 1.0 - ADAM_BETA2.powi(t);
                for j in 0..params.len() {
                    m[j] = ADAM_BETA1 * m[j] + (1.0 - ADAM_BETA1) * grad[j];
                    v[j] = ADAM_BETA2 * v[j] + (1.0 - ADAM_BETA2) * grad[j] * grad[j];
                    let m_hat = m[j] / m_corr;
                    let v_hat = v[j] / v_corr;
                    params[j] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            }
        }
    }
}

/// Loss and parameter gradient of `generator` under `config`'s task, without
/// taking any optimizer step. `config.generator` is ignored in favor of the
/// explicit argument, which makes finite-difference probing cheap.
pub fn loss_and_gradient(config: &TrainConfig, generator: &Generator) -> Result<(f64, Vec<f64>)> {
    config.validate()?;
    generator.validate()?;
    let ctx = TrainContext::prepare(config)?;
    let out = ctx.evaluate(generator, 0)?;
    Ok((out.loss, out.grad))
}

/// Run the configured number of optimizer steps and record the loss curve.
/// Produces `steps + 1` records: one per parameter state visited, including
/// the final state, which is evaluated but not stepped.
pub fn train(config: &TrainConfig) -> Result<TrainTrace> {
    config.validate()?;
    let ctx = TrainContext::prepare(config)?;
    let mut generator = config.generator.clone();
    let initial_generator = generator.clone();
    let mut optimizer = OptState::new(config.optimizer, generator.param_count());

    let mut records = Vec::with_capacity(config.steps + 1);
    let mut initial_histogram = None;
    let mut initial_histlayer = None;
    let mut final_histogram = None;
    let mut final_histlayer = None;

    for step in 0..=config.steps {
        let out = ctx.evaluate(&generator, step)?;
        let grad_norm = out.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        records.push(TrainRecord {
            step,
            loss: out.loss,
            grad_norm,
        });
        if step == 0 {
            initial_histogram = Some(ctx.snapshot(&out.hist)?);
            initial_histlayer = Some(ctx.histlayer_snapshot(&out.outputs)?);
        }
        if step == config.steps {
            final_histogram = Some(ctx.snapshot(&out.hist)?);
            final_histlayer = Some(ctx.histlayer_snapshot(&out.outputs)?);
            break;
        }
        let mut params = generator.params();
        optimizer.apply(&mut params, &out.grad, step, config.lr);
        if let Some(bad) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFiniteTraining {
                step,
                detail: format!("parameter {bad} became {} after update", params[bad]),
            });
        }
        generator.set_params(&params)?;
    }

    Ok(TrainTrace {
        records,
        initial_generator,
        final_generator: generator,
        target: ctx.target,
        initial_histogram: initial_histogram.expect("captured at step 0"),
        final_histogram: final_histogram.expect("captured at the last step"),
        initial_histlayer_histogram: initial_histlayer.expect("captured at step 0"),
        final_histlayer_histogram: final_histlayer.expect("captured at the last step"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::sum_abs_distance;

    fn quick_config(steps: usize) -> TrainConfig {
        let mut config = TrainConfig::affine_recovery();
        config.noise_n = 400;
        config.steps = steps;
        config
    }

    #[test]
    fn zero_steps_returns_one_record_and_leaves_parameters_alone() {
        let config = quick_config(0);
        let trace = train(&config).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].step, 0);
        assert_eq!(trace.initial_generator, trace.final_generator);
        assert_eq!(trace.initial_generator.params(), vec![1.0, 0.0]);
        assert_eq!(
            trace.initial_histogram.values(),
            trace.final_histogram.values()
        );
    }

    #[test]
    fn own_output_target_sits_at_exactly_zero_loss() {
        // Render the starting generator's own soft histogram, then train
        // toward it: the loss and gradient must be exactly zero because the
        // recomputation is bitwise identical.
        let probe = train(&quick_config(0)).unwrap();
        let mut config = quick_config(3);
        config.target = TargetSpec::Histogram {
            histogram: probe.initial_histogram.clone(),
        };
        let trace = train(&config).unwrap();
        for record in &trace.records {
            assert_eq!(record.loss, 0.0);
            assert_eq!(record.grad_norm, 0.0);
        }
        assert_eq!(trace.initial_generator, trace.final_generator);
    }

    #[test]
    fn sgd_with_zero_learning_rate_is_bitwise_constant() {
        let mut config = quick_config(5);
        config.optimizer = OptimizerKind::Sgd;
        config.lr = 0.0;
        let trace = train(&config).unwrap();
        assert_eq!(trace.records.len(), 6);
        let first = trace.records[0];
        for record in &trace.records {
            assert_eq!(record.loss.to_bits(), first.loss.to_bits());
            assert_eq!(record.grad_norm.to_bits(), first.grad_norm.to_bits());
        }
        assert_eq!(trace.initial_generator, trace.final_generator);
    }

    #[test]
    fn short_adam_run_reduces_the_loss() {
        let trace = train(&quick_config(150)).unwrap();
        let first = trace.records.first().unwrap().loss;
        let last = trace.records.last().unwrap().loss;
        assert!(last < first * 0.5, "loss {first} -> {last}");
        // The recovered map should drift toward scale 0.5, offset 0.2.
        let params = trace.final_generator.params();
        assert!((params[0] - 0.5).abs() < 0.4, "scale {}", params[0]);
        assert!((params[1] - 0.2).abs() < 0.2, "offset {}", params[1]);
    }

    #[test]
    fn chain_rule_gradient_matches_finite_differences_for_affine() {
        let config = quick_config(0);
        let at = Generator::affine(0.9, 0.1);
        let (_, grad) = loss_and_gradient(&config, &at).unwrap();
        let eps = 1e-6;
        for j in 0..2 {
            let mut up = at.clone();
            let mut down = at.clone();
            let mut params = at.params();
            params[j] += eps;
            up.set_params(&params).unwrap();
            params[j] -= 2.0 * eps;
            down.set_params(&params).unwrap();
            let (lu, _) = loss_and_gradient(&config, &up).unwrap();
            let (ld, _) = loss_and_gradient(&config, &down).unwrap();
            let numeric = (lu - ld) / (2.0 * eps);
            assert!(
                (grad[j] - numeric).abs() <= 1e-5 * grad[j].abs().max(1.0),
                "axis {j}: analytic {} vs numeric {numeric}",
                grad[j]
            );
        }
    }

    #[test]
    fn chain_rule_gradient_matches_finite_differences_for_mlp() {
        let mut config = quick_config(0);
        config.noise_n = 250;
        let at = Generator::mlp_seeded(3, 11).unwrap();
        let (_, grad) = loss_and_gradient(&config, &at).unwrap();
        let eps = 1e-6;
        let base = at.params();
        for j in 0..base.len() {
            let mut params = base.clone();
            params[j] += eps;
            let mut up = at.clone();
            up.set_params(&params).unwrap();
            params[j] -= 2.0 * eps;
            let mut down = at.clone();
            down.set_params(&params).unwrap();
            let (lu, _) = loss_and_gradient(&config, &up).unwrap();
            let (ld, _) = loss_and_gradient(&config, &down).unwrap();
            let numeric = (lu - ld) / (2.0 * eps);
            assert!(
                (grad[j] - numeric).abs() <= 1e-5 * grad[j].abs().max(1.0),
                "axis {j}: analytic {} vs numeric {numeric}",
                grad[j]
            );
        }
    }

    #[test]
    fn mlp_parameter_packing_round_trips() {
        let g = Generator::mlp_seeded(4, 3).unwrap();
        assert_eq!(g.param_count(), 13);
        let packed = g.params();
        let mut rebuilt = Generator::mlp_seeded(4, 99).unwrap();
        rebuilt.set_params(&packed).unwrap();
        assert_eq!(g, rebuilt);
        for z in [-1.3, 0.0, 0.4] {
            assert_eq!(g.forward(z).to_bits(), rebuilt.forward(z).to_bits());
        }
        // Same seed reproduces the same network.
        assert_eq!(g, Generator::mlp_seeded(4, 3).unwrap());
        assert_ne!(g, Generator::mlp_seeded(4, 5).unwrap());
    }

    #[test]
    fn forward_grad_agrees_with_forward() {
        let g = Generator::mlp_seeded(5, 21).unwrap();
        let mut grad = vec![0.0; g.param_count()];
        for z in [-0.8, 0.0, 1.7] {
            let y = g.forward_grad(z, &mut grad);
            assert_eq!(y.to_bits(), g.forward(z).to_bits());
        }
    }

    #[test]
    fn diverging_generator_reports_the_failing_step() {
        let mut config = quick_config(3);
        config.generator = Generator::affine(1e308, 1e308);
        let err = train(&config).unwrap_err();
        match err {
            Error::NonFiniteTraining { step, .. } => assert_eq!(step, 0),
            other => panic!("expected a training divergence error, got {other:?}"),
        }
    }

    #[test]
    fn affine_pushforward_target_is_the_hard_histogram_of_the_mapped_noise() {
        let config = quick_config(0);
        let trace = train(&config).unwrap();
        let noise = synthesize(&config.noise, config.noise_n, config.seed).unwrap();
        let mapped: Vec<f64> = noise.iter().map(|z| 0.5 * z + 0.2).collect();
        let batch = SampleBatch::new(mapped).unwrap();
        let expect = hard_histogram(
            &config.bins,
            &batch,
            BoundaryMode::RightOpenEdges,
            Normalization::Probability,
        )
        .unwrap();
        assert_eq!(trace.target.values(), expect.values());
        // All mapped values land inside [-1, 1), so the mass is complete.
        assert!((trace.target.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_target_uses_an_independent_batch() {
        let mut config = quick_config(0);
        config.target = TargetSpec::Distribution {
            distribution: Distribution::Normal {
                mean: 0.2,
                std: 0.25,
            },
        };
        let trace = train(&config).unwrap();
        assert!(trace.target.sum() > 0.9, "mass {}", trace.target.sum());
        // Changing the training seed changes the target batch too.
        let mut other = config.clone();
        other.seed = 1234;
        let other_trace = train(&other).unwrap();
        assert_ne!(trace.target.values(), other_trace.target.values());
    }

    #[test]
    fn histogram_targets_are_validated() {
        let config = quick_config(0);
        let bins = config.bins.clone();
        let counts =
            Histogram::new(bins.clone(), vec![1.0; bins.len()], Normalization::Counts).unwrap();
        let mut bad = quick_config(0);
        bad.target = TargetSpec::Histogram { histogram: counts };
        assert!(train(&bad).is_err());

        let heavy = Histogram::new(
            bins.clone(),
            vec![0.5; bins.len()],
            Normalization::Probability,
        )
        .unwrap();
        let mut bad = quick_config(0);
        bad.target = TargetSpec::Histogram { histogram: heavy };
        assert!(train(&bad).is_err());

        let other_bins = make_uniform_bins(-2.0, 2.0, bins.len()).unwrap();
        let misaligned = Histogram::new(
            other_bins,
            vec![0.0; bins.len()],
            Normalization::Probability,
        )
        .unwrap();
        let mut bad = quick_config(0);
        bad.target = TargetSpec::Histogram {
            histogram: misaligned,
        };
        assert!(train(&bad).is_err());
    }

    #[test]
    fn loss_values_and_gradients_match_hand_computation() {
        let (l2, g2) = Loss::L2.value_and_grad(&[0.3, 0.7], &[0.5, 0.5]);
        assert!((l2 - 0.08).abs() < 1e-15);
        assert!((g2[0] + 0.4).abs() < 1e-15);
        assert!((g2[1] - 0.4).abs() < 1e-15);
        let (l1, g1) = Loss::L1.value_and_grad(&[0.3, 0.5, 0.7], &[0.5, 0.5, 0.5]);
        assert!((l1 - 0.4).abs() < 1e-15);
        assert_eq!(g1, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn first_adam_step_has_learning_rate_magnitude() {
        // With zero moment history the first Adam update is lr-sized no
        // matter how large the gradient is.
        for g in [1.0, 100.0, 1e-3] {
            let mut state = OptState::new(OptimizerKind::Adam, 1);
            let mut params = vec![0.0];
            state.apply(&mut params, &[g], 0, 0.02);
            assert!(
                (params[0] + 0.02).abs() < 1e-6,
                "grad {g} moved to {}",
                params[0]
            );
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = quick_config(0);
        config.noise_n = 0;
        assert!(train(&config).is_err());
        let mut config = quick_config(0);
        config.lr = -0.1;
        assert!(train(&config).is_err());
        let mut config = quick_config(0);
        config.lr = f64::NAN;
        assert!(train(&config).is_err());
        assert!(Generator::mlp_seeded(0, 1).is_err());
        let mut config = quick_config(0);
        config.generator = Generator::Mlp {
            w1: vec![1.0],
            b1: vec![],
            w2: vec![1.0],
            b2: 0.0,
        };
        assert!(train(&config).is_err());
    }

    #[test]
    fn reruns_are_bitwise_identical() {
        let config = quick_config(40);
        let a = train(&config).unwrap();
        let b = train(&config).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_generator, b.final_generator);
        let fa = a.final_histogram.values();
        let fb = b.final_histogram.values();
        for (x, y) in fa.iter().zip(fb) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn histlayer_snapshot_tracks_the_hard_histogram() {
        // Moving toward the target should shrink the distance between the
        // histlayer rendering and the target, not just the kde loss.
        let trace = train(&quick_config(150)).unwrap();
        let before = sum_abs_distance(
            trace.initial_histlayer_histogram.values(),
            trace.target.values(),
        )
        .unwrap();
        let after = sum_abs_distance(
            trace.final_histlayer_histogram.values(),
            trace.target.values(),
        )
        .unwrap();
        assert!(after < before, "distance {before} -> {after}");
    }

    #[test]
    fn names_round_trip() {
        for loss in [Loss::L2, Loss::L1] {
            assert_eq!(loss.to_string().parse::<Loss>().unwrap(), loss);
        }
        for opt in [OptimizerKind::Adam, OptimizerKind::Sgd] {
            assert_eq!(opt.to_string().parse::<OptimizerKind>().unwrap(), opt);
        }
        assert!("l3".parse::<Loss>().is_err());
        assert!("momentum".parse::<OptimizerKind>().is_err());
    }
}
