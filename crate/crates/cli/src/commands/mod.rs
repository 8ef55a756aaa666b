pub mod analyze;
pub mod cluster;
pub mod features;
pub mod fit;
pub mod regress;
pub mod scan;
pub mod series;
pub mod synth;

use crate::Failure;

/// Wrap an error as an analysis-stage failure (exit 3).
pub fn stage_error(stage: &'static str, err: impl Into<anyhow::Error>) -> Failure {
    Failure::Analysis {
        stage,
        source: err.into(),
    }
}
