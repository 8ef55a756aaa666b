//! `scan`: JSONL documents + registry -> daily count CSVs + manifest.

use std::path::Path;

use anyhow::anyhow;
use serde_json::json;

use memdecay_core::corpus::{aggregate_counts_par, build_alias_index, CorpusWindow, Medium};

use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::{input_error, Failure};

/// Fraction of malformed lines above which the input is rejected.
const MALFORMED_ABORT_FRACTION: f64 = 0.01;

pub fn run(docs: &Path, registry: &Path, out: &Path, config: &RunConfig) -> Result<(), Failure> {
    let paths = OutPaths::new(out).map_err(input_error)?;
    let registry = formats::read_registry(registry).map_err(input_error)?;
    let stream = formats::read_documents(docs).map_err(input_error)?;

    if stream.total_lines > 0 {
        let malformed_fraction = stream.malformed as f64 / stream.total_lines as f64;
        if malformed_fraction > MALFORMED_ABORT_FRACTION {
            return Err(input_error(anyhow!(
                "{} of {} lines malformed ({:.2}%); aborting",
                stream.malformed,
                stream.total_lines,
                malformed_fraction * 100.0
            )));
        }
    }

    let index =
        build_alias_index(&registry, config.ambiguity_threshold).map_err(input_error)?;

    // Window: configured bounds, else the document stream's extent.
    let derived_window = || {
        let min = stream.documents.iter().map(|d| d.date).min();
        let max = stream.documents.iter().map(|d| d.date).max();
        min.zip(max).map(|(start, end)| CorpusWindow::new(start, end))
    };
    let window = match (config.window_start, config.window_end) {
        (Some(start), Some(end)) => Some(CorpusWindow::new(start, end)),
        _ => derived_window(),
    };

    let started = std::time::Instant::now();
    let counts = match window {
        Some(window) => aggregate_counts_par(&stream.documents, &index, &window),
        None => Default::default(),
    };
    let elapsed = started.elapsed();

    formats::write_counts(&paths.mention_counts(), &paths.total_counts(), &counts)
        .map_err(input_error)?;

    let manifest = json!({
        "stage": "scan",
        "config": config,
        "window": window,
        "documents": stream.documents.len(),
        "lines": stream.total_lines,
        "malformed_lines": stream.malformed,
        "quarantined": {
            "news": counts.quarantined(Medium::News),
            "twitter": counts.quarantined(Medium::Twitter),
        },
        "indexed_persons": index.person_count(),
        "alias_patterns": index.pattern_count(),
        "persons_without_unambiguous_full_name": index.excluded_persons,
        "rejected_surfaces": index.rejected.len(),
    });
    formats::write_json(&paths.file("scan_manifest.json"), &manifest).map_err(input_error)?;
    eprintln!(
        "scan: {} documents in {:.2}s ({} malformed lines skipped)",
        stream.documents.len(),
        elapsed.as_secs_f64(),
        stream.malformed
    );

    if stream.documents.is_empty() {
        return Err(input_error(anyhow!("document stream is empty")));
    }
    Ok(())
}
