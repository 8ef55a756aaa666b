//! Wilcoxon signed-rank test for paired differences.
//!
//! W is the sum of the ranks of the positive differences, with zeros dropped
//! and tied magnitudes sharing their average rank. The two-sided p-value is
//! exact up to n = 12 via the rank-sum distribution (enumeration-equivalent
//! dynamic program over doubled ranks), and a normal approximation with
//! continuity and tie corrections beyond.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{average_ranks, RegressError};

/// Largest n handled by exact enumeration.
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of positive-difference ranks.
    pub w: f64,
    pub two_sided_p: f64,
    /// Pairs remaining after zero differences are dropped.
    pub n_used: usize,
    pub exact: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired differences.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<WilcoxonResult, RegressError> {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Err(RegressError::AllZeroDifferences);
    }
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w: f64 = ranks
        .iter()
        .zip(&nonzero)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();

    let (p, exact) = if n <= EXACT_LIMIT {
        (exact_two_sided_p(&ranks, w), true)
    } else {
        (normal_two_sided_p(&ranks, w), false)
    };
    Ok(WilcoxonResult {
        w,
        two_sided_p: p,
        n_used: n,
        exact,
    })
}

/// Exact null distribution of W over all 2^n sign patterns, computed as a
/// subset-sum table over doubled ranks (average ranks are half-integers).
fn exact_two_sided_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let patterns = 2f64.powi(ranks.len() as i32);
    let w2 = (w * 2.0).round() as usize;
    let p_le: f64 = counts[..=w2].iter().sum::<f64>() / patterns;
    let p_ge: f64 = counts[w2..].iter().sum::<f64>() / patterns;
    (2.0 * p_le.min(p_ge)).min(1.0)
}

/// Normal approximation with continuity correction and the tie-adjusted
/// variance.
fn normal_two_sided_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // Tie correction: subtract sum(t^3 - t)/48 over tie groups.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if variance <= 0.0 {
        return 1.0;
    }
    let diff = w - mean;
    let corrected = if diff > 0.0 {
        diff - 0.5
    } else if diff < 0.0 {
        diff + 0.5
    } else {
        0.0
    };
    let z = corrected / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    (2.0 * (1.0 - normal.cdf(z.abs()))).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: literally enumerate all 2^n sign patterns.
    pub(crate) fn brute_force_two_sided_p(ranks: &[f64], w: f64) -> f64 {
        let n = ranks.len();
        let mut le = 0u64;
        let mut ge = 0u64;
        for mask in 0u64..(1 << n) {
            let w_sim: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
            if w_sim <= w + 1e-12 {
                le += 1;
            }
            if w_sim >= w - 1e-12 {
                ge += 1;
            }
        }
        let patterns = (1u64 << n) as f64;
        (2.0 * (le.min(ge) as f64) / patterns).min(1.0)
    }

    #[test]
    fn all_positive_three_differences() {
        let result = wilcoxon_signed_rank(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(result.w, 6.0);
        assert!((result.two_sided_p - 0.25).abs() < 1e-12);
        assert!(result.exact);
    }

    #[test]
    fn mirrored_differences_give_the_same_p() {
        let result = wilcoxon_signed_rank(&[-1.0, -2.0, -3.0]).unwrap();
        assert_eq!(result.w, 0.0);
        assert!((result.two_sided_p - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_differences_are_dropped() {
        let with_zeros = wilcoxon_signed_rank(&[1.0, 0.0, 2.0, 0.0, 3.0]).unwrap();
        let without = wilcoxon_signed_rank(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(with_zeros.w, without.w);
        assert_eq!(with_zeros.n_used, 3);
    }

    #[test]
    fn all_zero_differences_error() {
        assert!(matches!(
            wilcoxon_signed_rank(&[0.0, 0.0]),
            Err(RegressError::AllZeroDifferences)
        ));
    }

    #[test]
    fn exact_p_matches_brute_force_enumeration_exhaustively() {
        // Tie-free ranks 1..n, every sign pattern, n up to 10.
        for n in 1..=10usize {
            let ranks: Vec<f64> = (1..=n).map(|r| r as f64).collect();
            for mask in 0u64..(1 << n) {
                let diffs: Vec<f64> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { (i + 1) as f64 } else { -((i + 1) as f64) })
                    .collect();
                let result = wilcoxon_signed_rank(&diffs).unwrap();
                let oracle = brute_force_two_sided_p(&ranks, result.w);
                assert!(
                    (result.two_sided_p - oracle).abs() < 1e-12,
                    "n = {n}, mask = {mask}: {} vs {oracle}",
                    result.two_sided_p
                );
            }
        }
    }

    #[test]
    fn exact_handles_ties_via_average_ranks() {
        let result = wilcoxon_signed_rank(&[1.0, -1.0, 2.0, 2.0]).unwrap();
        // |diffs| = (1, 1, 2, 2) -> ranks (1.5, 1.5, 3.5, 3.5); W = 8.5.
        assert!((result.w - 8.5).abs() < 1e-12);
        let ranks = [1.5, 1.5, 3.5, 3.5];
        let oracle = brute_force_two_sided_p(&ranks, result.w);
        assert!((result.two_sided_p - oracle).abs() < 1e-12);
    }

    #[test]
    fn exact_and_normal_agree_at_the_crossover() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            // Tie-free n = 12 samples.
            let mut diffs: Vec<f64> = (1..=12)
                .map(|i| i as f64 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            use rand::seq::SliceRandom;
            diffs.shuffle(&mut rng);
            let ranks: Vec<f64> = (1..=12).map(|r| r as f64).collect();
            let exact = wilcoxon_signed_rank(&diffs).unwrap();
            assert!(exact.exact);
            let approx = normal_two_sided_p(&ranks, exact.w);
            assert!(
                (exact.two_sided_p - approx).abs() < 0.02,
                "W = {}: exact {} vs approx {approx}",
                exact.w,
                exact.two_sided_p
            );
        }
    }

    #[test]
    fn large_n_uses_the_normal_approximation() {
        let diffs: Vec<f64> = (1..=50).map(|i| i as f64 * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let result = wilcoxon_signed_rank(&diffs).unwrap();
        assert!(!result.exact);
        assert!(result.two_sided_p > 0.0 && result.two_sided_p <= 1.0);
    }
}
