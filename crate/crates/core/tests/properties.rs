//! Property tests over the pipeline's structural invariants.

use proptest::prelude::*;

use memdecay_core::cluster::trace_bounds;
use memdecay_core::features::{halving_time, FeatureWindows};
use memdecay_core::regress::{rank_scale, wilcoxon_signed_rank};
use memdecay_core::series::{supersmooth_segment, SmootherConfig, MentionSeries, SeriesKind};
use memdecay_core::corpus::{Medium, PersonId};

fn series_of(values: Vec<f64>) -> MentionSeries {
    let mut padded = vec![0.0; memdecay_core::series::SERIES_LEN];
    for (i, v) in values.into_iter().enumerate() {
        if i < padded.len() {
            padded[i] = v;
        }
    }
    MentionSeries {
        person_id: PersonId::new("p"),
        medium: Medium::News,
        kind: SeriesKind::Smoothed,
        epsilon: 1e-9,
        values: padded,
        interpolated: Default::default(),
        passthrough_warning: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Constants come back unchanged from the smoother at any length.
    #[test]
    fn smoother_reproduces_constants(c in -10.0f64..10.0, n in 10usize..200) {
        let out = supersmooth_segment(&vec![c; n], &SmootherConfig::default());
        prop_assert!(!out.passthrough);
        for v in out.values {
            prop_assert!((v - c).abs() < 1e-9);
        }
    }

    /// Smoothed output stays within the raw range plus the slope-bounded
    /// overshoot tolerance.
    #[test]
    fn smoother_output_range_is_bounded(values in prop::collection::vec(-9.0f64..-2.0, 30..180)) {
        let cfg = SmootherConfig::default();
        let out = supersmooth_segment(&values, &cfg);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let max_slope = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0f64, f64::max);
        let tol = max_slope * cfg.spans[2] * values.len() as f64 + 1e-9;
        for v in out.values {
            prop_assert!(v >= min - tol && v <= max + tol);
        }
    }

    /// Rank scaling lands in [-0.5, 0.5] and is monotone-transform invariant.
    /// Integer-valued inputs keep the affine transform exact in f64, so no
    /// ties appear or disappear under it.
    #[test]
    fn rank_scale_range_and_invariance(ints in prop::collection::vec(-1000i64..1000, 2..60)) {
        let values: Vec<f64> = ints.iter().map(|&v| v as f64).collect();
        let scaled = rank_scale(&values).unwrap();
        for v in &scaled {
            prop_assert!((-0.5..=0.5).contains(v));
        }
        let transformed: Vec<f64> = values.iter().map(|v| v * 0.5 + 3.0).collect();
        prop_assert_eq!(scaled, rank_scale(&transformed).unwrap());
    }

    /// The Wilcoxon p-value is a probability and W stays within its bounds.
    #[test]
    fn wilcoxon_p_is_a_probability(diffs in prop::collection::vec(-50.0f64..50.0, 1..40)) {
        prop_assume!(diffs.iter().any(|d| *d != 0.0));
        let result = wilcoxon_signed_rank(&diffs).unwrap();
        prop_assert!(result.two_sided_p > 0.0 && result.two_sided_p <= 1.0);
        let n = result.n_used as f64;
        prop_assert!(result.w >= 0.0 && result.w <= n * (n + 1.0) / 2.0);
    }

    /// Moving post-mortem mass later never shortens the halving time.
    #[test]
    fn halving_time_moves_with_the_mass(offset in 0i32..200, width in 1i32..40) {
        let windows = FeatureWindows::default();
        let base: Vec<f64> = (0..memdecay_core::series::SERIES_LEN)
            .map(|i| {
                let t = i as i32 + memdecay_core::series::DAY_MIN;
                if (0..width).contains(&t) { 1.0 } else { 0.0 }
            })
            .collect();
        let shifted: Vec<f64> = (0..memdecay_core::series::SERIES_LEN)
            .map(|i| {
                let t = i as i32 + memdecay_core::series::DAY_MIN;
                if (offset..offset + width).contains(&t) && t <= 360 { 1.0 } else { 0.0 }
            })
            .collect();
        prop_assume!(shifted.iter().any(|&v| v > 0.0));
        let early = halving_time(&series_of(base), &windows).unwrap();
        let late = halving_time(&series_of(shifted), &windows).unwrap();
        prop_assert!(late >= early);
    }

    /// Trace bounds bracket the trace of any actually constructed table.
    #[test]
    fn trace_bounds_bracket_constructed_tables(
        seed in 0u64..5000,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Build a random 4x4 table first, then derive its marginals.
        let table: Vec<Vec<u64>> = (0..4)
            .map(|_| (0..4).map(|_| rng.gen_range(0..8u64)).collect())
            .collect();
        let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
        let cols: Vec<u64> = (0..4).map(|j| table.iter().map(|r| r[j]).sum()).collect();
        prop_assume!(rows.iter().sum::<u64>() > 0);
        let (min, max) = trace_bounds(&rows, &cols).unwrap();
        let trace: u64 = (0..4).map(|i| table[i][i]).sum();
        prop_assert!(min <= trace && trace <= max);
    }
}
