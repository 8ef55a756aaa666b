//! `features`: raw + smoothed series pairs -> the four characteristic
//! numbers per person and medium.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;

use memdecay_core::corpus::{Medium, PersonId};
use memdecay_core::features::{extract, CurveFeatures, FeatureWindows};
use memdecay_core::series::{MentionSeries, SeriesKind};

use crate::commands::stage_error;
use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::{input_error, Failure};

pub fn run(
    series_path: &Path,
    out: &Path,
    config: &RunConfig,
) -> Result<Vec<CurveFeatures>, Failure> {
    let series = super::series::load_series(series_path)?;
    let paths = OutPaths::new(out).map_err(input_error)?;
    build(&series, &paths, config)
}

pub fn build(
    series: &[MentionSeries],
    paths: &OutPaths,
    config: &RunConfig,
) -> Result<Vec<CurveFeatures>, Failure> {
    let windows = FeatureWindows {
        pre: config.pre_window,
        short: config.short_window,
        long: config.long_window,
        halving: (config.short_window.0, config.long_window.1),
    };

    let mut pairs: BTreeMap<(PersonId, Medium), (Option<&MentionSeries>, Option<&MentionSeries>)> =
        BTreeMap::new();
    for s in series {
        let slot = pairs.entry((s.person_id.clone(), s.medium)).or_default();
        match s.kind {
            SeriesKind::Raw => slot.0 = Some(s),
            SeriesKind::Smoothed => slot.1 = Some(s),
        }
    }

    let mut features = Vec::new();
    for ((person, medium), (raw, smoothed)) in pairs {
        let (Some(raw), Some(smoothed)) = (raw, smoothed) else {
            return Err(stage_error(
                "features",
                anyhow!("{person} in {medium} is missing its raw or smoothed series"),
            ));
        };
        features
            .push(extract(raw, smoothed, &windows).map_err(|e| stage_error("features", e))?);
    }

    formats::write_features(&paths.features(), &features)
        .map_err(|e| stage_error("features", e))?;
    eprintln!("features: {} rows", features.len());
    Ok(features)
}
