//! `series`: counts + registry -> inclusion report, per-medium epsilon, and
//! raw + smoothed series for every included person.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, Context};
use chrono::{Duration, NaiveDate};
use serde_json::json;

use memdecay_core::corpus::{
    apply_inclusion_criteria, CorpusWindow, DailyMentionCounts, PersonId, PersonRecord,
};
use memdecay_core::series::{build_raw_series, compute_epsilon, supersmooth_with, MentionSeries};

use crate::commands::stage_error;
use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::{input_error, Failure};

pub fn run(
    counts_dir: &Path,
    registry_path: &Path,
    out: &Path,
    config: &RunConfig,
) -> Result<Vec<MentionSeries>, Failure> {
    let counts = formats::read_counts(
        &counts_dir.join("mention_counts.csv"),
        &counts_dir.join("total_counts.csv"),
    )
    .map_err(input_error)?;
    let registry = formats::read_registry(registry_path).map_err(input_error)?;
    let paths = OutPaths::new(out).map_err(input_error)?;
    build(&counts, &registry, &paths, config)
}

pub fn build(
    counts: &DailyMentionCounts,
    registry: &[PersonRecord],
    paths: &OutPaths,
    config: &RunConfig,
) -> Result<Vec<MentionSeries>, Failure> {
    let media = config.media.media();

    // Window: configured, else the extent of the recorded totals.
    let window = match (config.window_start, config.window_end) {
        (Some(start), Some(end)) => CorpusWindow::new(start, end),
        _ => {
            let mut days = counts.totals().map(|(_, day, _)| day);
            let first = days.next().ok_or_else(|| {
                input_error(anyhow!("counts are empty; nothing to build series from"))
            })?;
            let (min, max) = days.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d)));
            CorpusWindow::new(min, max)
        }
    };

    // Missing days: collection outages, i.e. days inside the window where
    // every selected medium recorded zero documents.
    let mut missing_days = BTreeSet::new();
    let mut day = window.start;
    while day <= window.end {
        if media.iter().all(|&m| counts.total_docs(m, day) == 0) {
            missing_days.insert(day);
        }
        day += Duration::days(1);
    }

    let inclusion = apply_inclusion_criteria(registry, counts, &missing_days, &window)
        .map_err(|e| stage_error("series", e))?;
    let included: Vec<(PersonId, NaiveDate)> = registry
        .iter()
        .filter(|p| inclusion.included.contains(&p.id))
        .map(|p| (p.id.clone(), p.death_date.expect("validated by inclusion")))
        .collect();
    if included.is_empty() {
        return Err(stage_error(
            "series",
            anyhow!("no person passes the inclusion criteria"),
        ));
    }

    let smoother = config.smoother();
    let mut epsilons = Vec::new();
    let mut series = Vec::new();
    for &medium in &media {
        let epsilon = compute_epsilon(&included, counts, medium, &window)
            .map_err(|e| stage_error("series", e))?;
        epsilons.push((medium, epsilon));
        for (person, death) in &included {
            let raw = build_raw_series(person, *death, medium, counts, epsilon, &window)
                .map_err(|e| stage_error("series", e))?;
            let smoothed = supersmooth_with(&raw, &smoother);
            series.push(raw);
            series.push(smoothed);
        }
    }

    formats::write_series(&paths.series(), &series).map_err(|e| stage_error("series", e))?;
    let manifest = json!({
        "stage": "series",
        "config": config,
        "window": window,
        "missing_days": missing_days,
        "epsilon": epsilons
            .iter()
            .map(|(m, e)| (m.as_str().to_owned(), *e))
            .collect::<std::collections::BTreeMap<_, _>>(),
        "included": inclusion.included,
        "excluded": inclusion.excluded,
        "passthrough_warnings": series.iter().filter(|s| s.passthrough_warning).count(),
    });
    formats::write_json(&paths.file("series_manifest.json"), &manifest)
        .map_err(|e| stage_error("series", e))?;
    eprintln!(
        "series: {} persons x {} media ({} excluded)",
        included.len(),
        media.len(),
        inclusion.excluded.len()
    );

    Ok(series)
}

/// Read series back from disk, context-wrapped for stage errors.
pub fn load_series(path: &Path) -> Result<Vec<MentionSeries>, Failure> {
    formats::read_series(path)
        .with_context(|| format!("reading series from {}", path.display()))
        .map_err(input_error)
}
