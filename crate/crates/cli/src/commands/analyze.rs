//! `analyze`: everything downstream of counts in one pass, with a run
//! manifest naming the completed stages (and the failed one, if any).

use std::path::Path;

use serde_json::json;

use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::{input_error, Failure};

pub fn run(
    counts_dir: &Path,
    registry_path: &Path,
    out: &Path,
    config: &RunConfig,
) -> Result<(), Failure> {
    let counts = formats::read_counts(
        &counts_dir.join("mention_counts.csv"),
        &counts_dir.join("total_counts.csv"),
    )
    .map_err(input_error)?;
    let registry = formats::read_registry(registry_path).map_err(input_error)?;
    let paths = OutPaths::new(out).map_err(input_error)?;

    let mut completed: Vec<&'static str> = Vec::new();
    let outcome = (|| -> Result<(), Failure> {
        let series = super::series::build(&counts, &registry, &paths, config)?;
        completed.push("series");
        super::fit::build(&series, &paths, config)?;
        completed.push("fit");
        let features = super::features::build(&series, &paths, config)?;
        completed.push("features");
        super::cluster::build(&features, &paths, config)?;
        completed.push("cluster");
        super::regress::build(&features, &registry, &paths, config)?;
        completed.push("regress");
        Ok(())
    })();

    let (failed_stage, error) = match &outcome {
        Ok(()) => (None, None),
        Err(Failure::Analysis { stage, source }) => (Some(*stage), Some(format!("{source:#}"))),
        Err(Failure::Input(err)) => (Some("input"), Some(format!("{err:#}"))),
    };

    let manifest = json!({
        "stage": "analyze",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "stages_completed": completed,
        "failed_stage": failed_stage,
        "error": error,
    });
    formats::write_json(&paths.file("run_manifest.json"), &manifest).map_err(input_error)?;

    outcome
}
