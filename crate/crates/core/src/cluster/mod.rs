//! Clustering of curve-feature vectors and cross-media agreement analysis.

mod confusion;
mod kmeans;
mod transport;

pub use confusion::{
    chi2_independence, confusion, expected_trace, proportions_test, Chi2Result, ConfusionMatrix,
};
pub use kmeans::{kmeans, mean_silhouette, select_k, ClusterResult, KSelection};
pub use transport::trace_bounds;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PersonId;
use crate::features::CurveFeatures;

/// Number of features per person.
pub const FEATURE_DIM: usize = 4;
pub const FEATURE_NAMES: [&str; FEATURE_DIM] =
    ["pre_mean", "short_boost", "long_boost", "halving_time"];

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
    #[error("need more points than clusters: n = {n}, k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("feature column '{0}' is constant; z-scores undefined")]
    ConstantColumn(&'static str),
    #[error("empty feature matrix")]
    Empty,
    #[error("assignments cover different person sets")]
    PersonSetMismatch,
    #[error("cluster label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("marginal totals differ: rows sum to {rows}, columns to {cols}")]
    MarginalMismatch { rows: u64, cols: u64 },
    #[error("marginal vectors must have equal nonzero length")]
    BadMarginals,
    #[error("chi-square test needs positive marginals everywhere")]
    ZeroMarginal,
    #[error("proportions test needs trials > 0")]
    NoTrials,
    #[error("p0 must lie strictly between 0 and 1, got {0}")]
    BadNullProportion(f64),
    #[error("successes {successes} exceed trials {trials}")]
    TooManySuccesses { successes: u64, trials: u64 },
}

/// Feature rows in z-score-standardized form, with the per-column mean and
/// standard deviation that produced them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub persons: Vec<PersonId>,
    /// Row-major standardized values, `persons.len() x FEATURE_DIM`.
    data: Vec<f64>,
    pub means: [f64; FEATURE_DIM],
    pub stds: [f64; FEATURE_DIM],
}

impl FeatureMatrix {
    /// Standardize extracted features; rows are sorted by person id.
    pub fn from_features(features: &[CurveFeatures]) -> Result<Self, ClusterError> {
        let mut sorted: Vec<&CurveFeatures> = features.iter().collect();
        sorted.sort_by(|a, b| a.person_id.cmp(&b.person_id));
        let persons = sorted.iter().map(|f| f.person_id.clone()).collect();
        let rows: Vec<[f64; FEATURE_DIM]> = sorted.iter().map(|f| f.as_row()).collect();
        Self::from_rows(persons, &rows)
    }

    /// Standardize raw feature rows (used for synthetic populations).
    pub fn from_rows(
        persons: Vec<PersonId>,
        rows: &[[f64; FEATURE_DIM]],
    ) -> Result<Self, ClusterError> {
        let n = rows.len();
        if n == 0 {
            return Err(ClusterError::Empty);
        }
        assert_eq!(persons.len(), n);
        let mut means = [0.0; FEATURE_DIM];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut stds = [0.0; FEATURE_DIM];
        for row in rows {
            for (s, (v, m)) in stds.iter_mut().zip(row.iter().zip(&means)) {
                *s += (v - m) * (v - m);
            }
        }
        for (j, s) in stds.iter_mut().enumerate() {
            *s = (*s / n as f64).sqrt();
            if *s < 1e-12 {
                return Err(ClusterError::ConstantColumn(FEATURE_NAMES[j]));
            }
        }
        let mut data = Vec::with_capacity(n * FEATURE_DIM);
        for row in rows {
            for j in 0..FEATURE_DIM {
                data.push((row[j] - means[j]) / stds[j]);
            }
        }
        Ok(FeatureMatrix {
            persons,
            data,
            means,
            stds,
        })
    }

    #[cfg(test)]
    pub(crate) fn from_standardized(persons: Vec<PersonId>, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), persons.len() * FEATURE_DIM);
        FeatureMatrix {
            persons,
            data,
            means: [0.0; FEATURE_DIM],
            stds: [1.0; FEATURE_DIM],
        }
    }

    pub fn len(&self) -> usize {
        self.persons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.persons.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * FEATURE_DIM..(i + 1) * FEATURE_DIM]
    }

    /// Undo the z-scoring of a standardized point.
    pub fn destandardize(&self, row: &[f64]) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for j in 0..FEATURE_DIM {
            out[j] = row[j] * self.stds[j] + self.means[j];
        }
        out
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}
