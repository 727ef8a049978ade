//! Randomized invariants for the kernel family, the hard oracle, and the
//! benchmark path.

use diffhist::{
    hard_histogram, make_uniform_bins, run_comparison, synthesize, vote, vote_grad, BinSpec,
    BoundKernel, BoundaryMode, Distribution, ErrorMetric, Histogram, KernelKind, Normalization,
    SampleBatch,
};
use proptest::prelude::*;

fn kernel_kind() -> impl Strategy<Value = KernelKind> {
    prop::sample::select(KernelKind::ALL.to_vec())
}

/// Map a unit draw onto a plausible shape parameter for the kernel family.
fn param_for(kind: KernelKind, raw: f64) -> f64 {
    match kind {
        KernelKind::HistLayer => 1.0001 + raw * 0.5,
        KernelKind::Lbf => 0.1 + raw * 49.9,
        KernelKind::Rbf => 0.1 + raw * 39.9,
        KernelKind::Kde => 0.005 + raw * 0.495,
    }
}

proptest! {
    /// With the slope matched to the bin spacing (w = 1/(2 omega), i.e.
    /// support reaching exactly to the neighboring centers), the tent votes
    /// of adjacent bins sum to one everywhere between the first and last
    /// center.
    #[test]
    fn lbf_tents_partition_unity_at_matched_slope(
        k in 2usize..=24,
        lo in -3.0f64..2.0,
        span in 0.5f64..4.0,
        frac in 0.0f64..=1.0,
    ) {
        let bins = make_uniform_bins(lo, lo + span, k).unwrap();
        let omega = bins.half_width(0);
        let kernel =
            BoundKernel::from_params(KernelKind::Lbf, &bins, vec![1.0 / (2.0 * omega); k])
                .unwrap();
        let x = bins.center(0) + frac * (bins.center(k - 1) - bins.center(0));
        let total: f64 = (0..k).map(|bin| kernel.vote(bin, x)).sum();
        prop_assert!(
            (total - 1.0).abs() <= 1e-12,
            "votes at x={x} sum to {total}"
        );
    }

    /// Every kernel depends on x and mu only through x - mu, so the two
    /// partials are exact mirrors.
    #[test]
    fn center_gradient_mirrors_input_gradient(
        kind in kernel_kind(),
        x in -6.0f64..6.0,
        mu in -5.0f64..5.0,
        omega in 0.01f64..1.0,
        raw in 0.0f64..1.0,
    ) {
        let param = param_for(kind, raw);
        let g = vote_grad(kind, x, mu, omega, param);
        // Exact as f64 values (covers the signed-zero case outside the
        // support), and within the stated tolerance.
        prop_assert_eq!(g.d_dmu, -g.d_dx);
        prop_assert!((g.d_dmu + g.d_dx).abs() <= 1e-12);
    }

    /// Negation is exact in floating point, so reflecting both the sample
    /// and the center through the origin must reproduce the vote bit for
    /// bit; with the center at zero this is evenness in x itself. (Evenness
    /// around an arbitrary center holds only up to rounding of mu +/- d,
    /// which is a property of the inputs, not of the kernel.)
    #[test]
    fn votes_are_symmetric_under_reflection(
        kind in kernel_kind(),
        mu in -5.0f64..5.0,
        x in -8.0f64..8.0,
        omega in 0.01f64..1.0,
        raw in 0.0f64..1.0,
    ) {
        let param = param_for(kind, raw);
        let here = vote(kind, x, mu, omega, param);
        let mirrored = vote(kind, -x, -mu, omega, param);
        prop_assert_eq!(here.to_bits(), mirrored.to_bits());
        let even = vote(kind, -x, 0.0, omega, param);
        prop_assert_eq!(vote(kind, x, 0.0, omega, param).to_bits(), even.to_bits());
    }

    /// Shifting the samples and the bin layout together leaves every soft
    /// histogram unchanged up to rounding in the shifted coordinates.
    #[test]
    fn soft_histograms_are_translation_invariant(
        kind in kernel_kind(),
        seed in 0u64..1000,
        n in 1usize..400,
        shift in -8.0f64..8.0,
    ) {
        let bins = make_uniform_bins(-1.0, 1.0, 20).unwrap();
        let samples = synthesize(
            &Distribution::Normal { mean: 0.0, std: 0.5 },
            n,
            seed,
        )
        .unwrap();
        let moved = SampleBatch::new(samples.iter().map(|x| x + shift).collect()).unwrap();
        let moved_bins = BinSpec::new(
            bins.centers().iter().map(|c| c + shift).collect(),
            bins.half_widths().to_vec(),
        )
        .unwrap();
        let here = BoundKernel::with_defaults(kind, &bins).unwrap()
            .histogram(&samples, Normalization::Probability)
            .unwrap();
        let there = BoundKernel::with_defaults(kind, &moved_bins).unwrap()
            .histogram(&moved, Normalization::Probability)
            .unwrap();
        let mut drift = 0.0f64;
        for (a, b) in here.values().iter().zip(there.values()) {
            drift += (a - b).abs();
        }
        prop_assert!(drift <= 1e-12, "translation moved mass by {drift}");
    }

    /// The edge-search oracle agrees exactly with a per-sample linear scan.
    #[test]
    fn right_open_oracle_matches_brute_force(
        k in 1usize..=16,
        lo in -2.0f64..1.0,
        span in 0.5f64..3.0,
        values in prop::collection::vec(-4.0f64..4.0, 0..200),
    ) {
        let bins = make_uniform_bins(lo, lo + span, k).unwrap();
        let samples = SampleBatch::new(values.clone()).unwrap();
        let fast = hard_histogram(
            &bins,
            &samples,
            BoundaryMode::RightOpenEdges,
            Normalization::Counts,
        )
        .unwrap();
        let edges = bins.left_edges_plus_end();
        let hi = *edges.last().unwrap();
        let mut slow = vec![0.0; k];
        for &x in &values {
            if x < edges[0] || x > hi {
                continue;
            }
            if x == hi {
                slow[k - 1] += 1.0;
                continue;
            }
            for bin in 0..k {
                if edges[bin] <= x && x < edges[bin + 1] {
                    slow[bin] += 1.0;
                    break;
                }
            }
        }
        prop_assert_eq!(fast.values(), &slow[..]);
    }

    /// The strict-interior oracle agrees exactly with the definition, even
    /// for overlapping bins where one sample may count several times.
    #[test]
    fn open_interval_oracle_matches_brute_force(
        start in -2.0f64..0.0,
        gaps in prop::collection::vec(0.05f64..0.5, 1..10),
        widths in prop::collection::vec(0.01f64..0.8, 10),
        values in prop::collection::vec(-4.0f64..4.0, 0..200),
    ) {
        let mut centers = Vec::with_capacity(gaps.len());
        let mut c = start;
        for gap in &gaps {
            c += gap;
            centers.push(c);
        }
        let half_widths = widths[..centers.len()].to_vec();
        let bins = BinSpec::new(centers.clone(), half_widths.clone()).unwrap();
        let samples = SampleBatch::new(values.clone()).unwrap();
        let fast = hard_histogram(
            &bins,
            &samples,
            BoundaryMode::OpenInterval,
            Normalization::Counts,
        )
        .unwrap();
        let mut slow = vec![0.0; centers.len()];
        for &x in &values {
            for bin in 0..centers.len() {
                if (x - centers[bin]).abs() < half_widths[bin] {
                    slow[bin] += 1.0;
                }
            }
        }
        prop_assert_eq!(fast.values(), &slow[..]);
    }

    /// Same seed, same bits: synthesis and the full comparison pipeline.
    #[test]
    fn seeded_runs_are_bitwise_deterministic(
        seed in 0u64..5000,
        n in 1usize..300,
    ) {
        let dist = Distribution::Bimodal {
            mean1: -0.5,
            std1: 0.15,
            mean2: 0.5,
            std2: 0.15,
            mix: 0.5,
        };
        let a = synthesize(&dist, n, seed).unwrap();
        let b = synthesize(&dist, n, seed).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
        let bins = make_uniform_bins(-1.0, 1.0, 10).unwrap();
        let run = |batch: &SampleBatch| {
            run_comparison(
                batch,
                &bins,
                &KernelKind::ALL,
                BoundaryMode::RightOpenEdges,
                Normalization::Probability,
                ErrorMetric::SumAbs,
                None,
                None,
            )
            .unwrap()
        };
        let ra = run(&a);
        let rb = run(&b);
        for (rowa, rowb) in ra.rows.iter().zip(&rb.rows) {
            prop_assert_eq!(rowa.kernel, rowb.kernel);
            prop_assert_eq!(rowa.error.to_bits(), rowb.error.to_bits());
        }
    }

    /// Counts and probability scales of the same soft histogram differ by
    /// exactly the sample count.
    #[test]
    fn probability_scale_is_counts_over_n(
        kind in kernel_kind(),
        seed in 0u64..1000,
        n in 1usize..300,
    ) {
        let bins = make_uniform_bins(-1.0, 1.0, 8).unwrap();
        let samples = synthesize(&Distribution::STANDARD_NORMAL, n, seed).unwrap();
        let kernel = BoundKernel::with_defaults(kind, &bins).unwrap();
        let counts = kernel.histogram(&samples, Normalization::Counts).unwrap();
        let prob = kernel
            .histogram(&samples, Normalization::Probability)
            .unwrap();
        for (c, p) in counts.values().iter().zip(prob.values()) {
            prop_assert_eq!((c / n as f64).to_bits(), p.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A hotter base means a larger per-vote overshoot over the strict
    /// count, for every sample set: each surviving vote b^t with t > 0 grows
    /// in b while the hard count stays put.
    #[test]
    fn histlayer_error_grows_with_base(
        seed in 0u64..2000,
        n in 10usize..2000,
    ) {
        let bins = make_uniform_bins(-1.0, 1.0, 20).unwrap();
        let samples = synthesize(&Distribution::STANDARD_NORMAL, n, seed).unwrap();
        let mut last = -1.0f64;
        for base in [1.001, 1.01, 1.1] {
            let report = run_comparison(
                &samples,
                &bins,
                &[KernelKind::HistLayer],
                BoundaryMode::OpenInterval,
                Normalization::Probability,
                ErrorMetric::SumAbs,
                Some(base),
                None,
            )
            .unwrap();
            let err = report.rows[0].error;
            prop_assert!(
                err >= last,
                "error fell from {last} to {err} when base rose to {base}"
            );
            last = err;
        }
    }

    /// Round-tripping a histogram through its serialized form preserves
    /// values and rejects tampered payloads.
    #[test]
    fn histogram_serde_round_trip(
        seed in 0u64..1000,
        n in 1usize..200,
    ) {
        let bins = make_uniform_bins(-1.0, 1.0, 6).unwrap();
        let samples = synthesize(&Distribution::STANDARD_NORMAL, n, seed).unwrap();
        let hist = hard_histogram(
            &bins,
            &samples,
            BoundaryMode::RightOpenEdges,
            Normalization::Probability,
        )
        .unwrap();
        let json = serde_json::to_string(&hist).unwrap();
        let back: Histogram = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.values(), hist.values());
        prop_assert_eq!(back.normalization(), hist.normalization());
        let tampered = json.replace("\"probability\"", "\"upside_down\"");
        prop_assert!(serde_json::from_str::<Histogram>(&tampered).is_err());
    }
}
