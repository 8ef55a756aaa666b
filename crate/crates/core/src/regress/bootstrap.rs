//! Percentile bootstrap confidence interval for the median.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RegressError;

const REPLICATE_STRIDE: u64 = 0x51_7c_c1_b7_27_22_0a_95;

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Percentile bootstrap CI for the median. Deterministic given `seed`:
/// replicates draw from per-replicate derived generators.
pub fn bootstrap_median_ci(
    values: &[f64],
    replicates: usize,
    seed: u64,
    level: f64,
) -> Result<(f64, f64), RegressError> {
    let n = values.len();
    if n < 2 || replicates < 1000 {
        return Err(RegressError::BadBootstrapInput { n, b: replicates });
    }
    assert!(level > 0.0 && level < 1.0);

    let mut medians: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((r as u64).wrapping_mul(REPLICATE_STRIDE)));
            let mut sample: Vec<f64> = (0..n).map(|_| values[rng.gen_range(0..n)]).collect();
            median(&mut sample)
        })
        .collect();
    medians.sort_by(f64::total_cmp);

    let alpha = 1.0 - level;
    let lo_idx = (alpha / 2.0 * replicates as f64) as usize;
    let hi_idx = (((1.0 - alpha / 2.0) * replicates as f64) as usize).min(replicates - 1);
    Ok((medians[lo_idx], medians[hi_idx]))
}
