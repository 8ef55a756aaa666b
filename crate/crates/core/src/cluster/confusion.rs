//! Cross-media cluster agreement: confusion matrix, Pearson's chi-square
//! independence test, and the one-sample proportions test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::ClusterError;
use crate::corpus::PersonId;

/// Counts of persons per (news cluster, Twitter cluster) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[i][j]` = persons in news cluster i and Twitter cluster j.
    pub counts: Vec<Vec<u64>>,
    pub row_marginals: Vec<u64>,
    pub col_marginals: Vec<u64>,
    pub n: u64,
}

impl ConfusionMatrix {
    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    /// Sum of diagonal entries (same cluster label in both media).
    pub fn trace(&self) -> u64 {
        (0..self.rows().min(self.cols())).map(|i| self.counts[i][i]).sum()
    }
}

/// Build the confusion matrix from per-person cluster labels in each medium.
pub fn confusion(
    news: &BTreeMap<PersonId, usize>,
    twitter: &BTreeMap<PersonId, usize>,
    k_news: usize,
    k_twitter: usize,
) -> Result<ConfusionMatrix, ClusterError> {
    if news.len() != twitter.len() || !news.keys().eq(twitter.keys()) {
        return Err(ClusterError::PersonSetMismatch);
    }
    let mut counts = vec![vec![0u64; k_twitter]; k_news];
    for (person, &i) in news {
        let j = twitter[person];
        if i >= k_news {
            return Err(ClusterError::LabelOutOfRange { label: i, k: k_news });
        }
        if j >= k_twitter {
            return Err(ClusterError::LabelOutOfRange { label: j, k: k_twitter });
        }
        counts[i][j] += 1;
    }
    let row_marginals: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
    let col_marginals: Vec<u64> =
        (0..k_twitter).map(|j| counts.iter().map(|row| row[j]).sum()).collect();
    let n = row_marginals.iter().sum();
    Ok(ConfusionMatrix {
        counts,
        row_marginals,
        col_marginals,
        n,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Chi2Result {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Pearson's chi-square test of independence against expected counts
/// `row_i * col_j / n`.
pub fn chi2_independence(matrix: &ConfusionMatrix) -> Result<Chi2Result, ClusterError> {
    if matrix.row_marginals.iter().any(|&r| r == 0) || matrix.col_marginals.iter().any(|&c| c == 0)
    {
        return Err(ClusterError::ZeroMarginal);
    }
    let n = matrix.n as f64;
    let mut statistic = 0.0;
    for (i, row) in matrix.counts.iter().enumerate() {
        for (j, &observed) in row.iter().enumerate() {
            let expected =
                matrix.row_marginals[i] as f64 * matrix.col_marginals[j] as f64 / n;
            let diff = observed as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let dof = (matrix.rows() as u64 - 1) * (matrix.cols() as u64 - 1);
    Ok(Chi2Result {
        statistic,
        dof,
        p_value: chi2_upper_tail(statistic, dof),
    })
}

/// Expected trace under independence: `sum_i row_i * col_i / n`.
pub fn expected_trace(rows: &[u64], cols: &[u64]) -> Result<f64, ClusterError> {
    if rows.is_empty() || rows.len() != cols.len() {
        return Err(ClusterError::BadMarginals);
    }
    let n: u64 = rows.iter().sum();
    if n == 0 {
        return Err(ClusterError::BadMarginals);
    }
    Ok(rows
        .iter()
        .zip(cols)
        .map(|(&r, &c)| r as f64 * c as f64)
        .sum::<f64>()
        / n as f64)
}

/// One-sample proportions test with continuity correction:
/// `chi2 = (|x - n p0| - 1/2)^2 / (n p0 (1 - p0))`, clamped at zero when the
/// deviation is within the correction.
pub fn proportions_test(
    successes: u64,
    trials: u64,
    p0: f64,
) -> Result<Chi2Result, ClusterError> {
    if trials == 0 {
        return Err(ClusterError::NoTrials);
    }
    if successes > trials {
        return Err(ClusterError::TooManySuccesses { successes, trials });
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(ClusterError::BadNullProportion(p0));
    }
    let n = trials as f64;
    let diff = (successes as f64 - n * p0).abs();
    let corrected = (diff - 0.5).max(0.0);
    let statistic = corrected * corrected / (n * p0 * (1.0 - p0));
    Ok(Chi2Result {
        statistic,
        dof: 1,
        p_value: chi2_upper_tail(statistic, 1),
    })
}

fn chi2_upper_tail(statistic: f64, dof: u64) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}
