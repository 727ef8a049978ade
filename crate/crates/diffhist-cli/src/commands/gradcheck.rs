//! `gradcheck`: compare analytic kernel partials against central finite
//! differences over a deterministic probe plan; exit 2 if any kernel's
//! worst relative error exceeds the tolerance.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use diffhist::{
    check_kernel, make_uniform_bins, BoundKernel, CheckSettings, GradCheckReport, KernelKind,
};
use serde::{Deserialize, Serialize};

use crate::common::{emit_json, file_defaults, Outcome, SoftKernel, PLAN_PRNG};

#[derive(Args)]
pub struct GradcheckArgs {
    /// JSON file with flat defaults for the flags below.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Kernel to certify; all four when omitted.
    #[arg(long, value_enum)]
    kernel: Option<SoftKernel>,
    /// Probe points planned per kernel, before kink exclusion.
    #[arg(long)]
    points: Option<usize>,
    /// Central-difference step.
    #[arg(long)]
    eps: Option<f64>,
    /// Probes closer than this to a kink are skipped.
    #[arg(long)]
    exclusion: Option<f64>,
    /// Jitter seed for the probe plan.
    #[arg(long = "plan-seed")]
    plan_seed: Option<u64>,
    /// Maximum allowed relative error before exit code 2.
    #[arg(long)]
    tol: Option<f64>,
    /// JSON report file; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Default, Deserialize)]
#[serde(default)]
struct GradcheckFile {
    kernel: Option<SoftKernel>,
    points: Option<usize>,
    eps: Option<f64>,
    exclusion: Option<f64>,
    plan_seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
}

/// The fully resolved run, embedded in the report. A null kernel means all
/// four were checked.
#[derive(Serialize)]
pub struct GradcheckConfig {
    command: &'static str,
    kernel: Option<SoftKernel>,
    points: usize,
    eps: f64,
    exclusion: f64,
    plan_seed: u64,
    tol: f64,
    prng: &'static str,
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct GradcheckOutput {
    config: GradcheckConfig,
    passed: bool,
    reports: Vec<GradCheckReport>,
}

pub fn run(args: GradcheckArgs) -> Result<Outcome> {
    let file: GradcheckFile = file_defaults(args.config.as_ref())?;
    let defaults = CheckSettings::default();
    let cfg = GradcheckConfig {
        command: "gradcheck",
        kernel: args.kernel.or(file.kernel),
        points: args.points.or(file.points).unwrap_or(defaults.points),
        eps: args.eps.or(file.eps).unwrap_or(defaults.eps),
        exclusion: args
            .exclusion
            .or(file.exclusion)
            .unwrap_or(defaults.exclusion_radius),
        plan_seed: args
            .plan_seed
            .or(file.plan_seed)
            .unwrap_or(defaults.plan_seed),
        tol: args.tol.or(file.tol).unwrap_or(1e-6),
        prng: PLAN_PRNG,
        out: args.out.or(file.out),
    };

    let settings = CheckSettings {
        points: cfg.points,
        eps: cfg.eps,
        exclusion_radius: cfg.exclusion,
        plan_seed: cfg.plan_seed,
    };
    let kinds: Vec<KernelKind> = match cfg.kernel {
        Some(kernel) => vec![kernel.kind()],
        None => KernelKind::ALL.to_vec(),
    };
    let bins = make_uniform_bins(-1.0, 1.0, 20)?;
    let mut reports = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let kernel = BoundKernel::with_defaults(kind, &bins)?;
        reports.push(check_kernel(&kernel, &settings)?);
    }
    let passed = reports.iter().all(|report| report.passes(cfg.tol));

    let output = GradcheckOutput {
        config: cfg,
        passed,
        reports,
    };
    emit_json(output.config.out.clone().as_ref(), &output)?;
    if passed {
        Ok(Outcome::Success)
    } else {
        Ok(Outcome::ThresholdExceeded)
    }
}
