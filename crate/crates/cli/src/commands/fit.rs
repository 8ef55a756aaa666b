//! `fit`: mean log series per medium -> model-catalog ranking, the
//! communicative/cultural decomposition table, and an overlay plot.

use std::path::Path;

use anyhow::anyhow;
use serde_json::json;

use memdecay_core::corpus::Medium;
use memdecay_core::model::{
    compare_models, crossover_time, decompose, fit_model_range, mean_log_series, quantile_time,
    MeanCurve, ModelId, ShiftedPowerLawParams,
};
use memdecay_core::series::{MentionSeries, SeriesKind};

use crate::commands::stage_error;
use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::svg::{LineChart, PALETTE};
use crate::{input_error, Failure};

pub fn run(series_path: &Path, out: &Path, config: &RunConfig) -> Result<(), Failure> {
    let series = super::series::load_series(series_path)?;
    let paths = OutPaths::new(out).map_err(input_error)?;
    build(&series, &paths, config)
}

pub fn build(
    series: &[MentionSeries],
    paths: &OutPaths,
    config: &RunConfig,
) -> Result<(), Failure> {
    for medium in config.media.media() {
        let raw: Vec<MentionSeries> = series
            .iter()
            .filter(|s| s.medium == medium && s.kind == SeriesKind::Raw)
            .cloned()
            .collect();
        if raw.is_empty() {
            return Err(stage_error(
                "fit",
                anyhow!("no raw series for {medium}; run the series stage first"),
            ));
        }
        let curve = mean_log_series(&raw).map_err(|e| stage_error("fit", e))?;

        let ranking =
            compare_models(ModelId::catalog(), &curve).map_err(|e| stage_error("fit", e))?;
        let spl_fit = fit_model_range(ModelId::ShiftedPowerLaw, &curve, config.fit_range)
            .map_err(|e| stage_error("fit", e))?;
        let params = ShiftedPowerLawParams::from_slice(&spl_fit.params);
        let crossover = crossover_time(&params);
        let quarter = quantile_time(&params, 0.25).map_err(|e| stage_error("fit", e))?;

        let report = json!({
            "medium": medium,
            "fit_range": config.fit_range,
            "shifted_power_law": {
                "params": {
                    "amplitude": params.amplitude,
                    "exponent": params.exponent,
                    "baseline": params.baseline,
                },
                "sse_log": spl_fit.sse_log,
                "r2_log": spl_fit.r2_log,
                "converged": spl_fit.converged,
                "starts": spl_fit.starts,
                "crossover_day": crossover,
                "quarter_share_day": quarter,
            },
            "catalog_ranking": ranking.ranked,
            "fit_failures": ranking.failures,
        });
        formats::write_json(&paths.fit_report(medium), &report)
            .map_err(|e| stage_error("fit", e))?;

        write_decomposition(&paths.decomposition(medium), &params, config.fit_range)
            .map_err(|e| stage_error("fit", e))?;
        write_plot(&paths.fit_plot(medium), medium, &curve, &params, config.fit_range)
            .map_err(|e| stage_error("fit", e))?;
        eprintln!(
            "fit: {medium} decay exponent {:.3}, fading component below baseline after day {crossover}",
            params.exponent
        );
    }
    Ok(())
}

/// Decomposition CSV: `t,u,v,share` over the fit range.
fn write_decomposition(
    path: &Path,
    params: &ShiftedPowerLawParams,
    fit_range: (u32, u32),
) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["t", "u", "v", "share"])?;
    for t in fit_range.0..=fit_range.1 {
        let d = decompose(params, t as f64);
        out.write_record([
            t.to_string(),
            d.communicative.to_string(),
            d.cultural.to_string(),
            d.communicative_share.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn write_plot(
    path: &Path,
    medium: Medium,
    curve: &MeanCurve,
    params: &ShiftedPowerLawParams,
    fit_range: (u32, u32),
) -> anyhow::Result<()> {
    let mut chart = LineChart::new(
        &format!("Mean mention series and fitted decay ({medium})"),
        "days since death",
        "log10 mention fraction",
    );
    let range = fit_range.0 as i32..=fit_range.1 as i32;
    chart.add_series(
        "mean of raw series",
        PALETTE[0],
        range
            .clone()
            .map(|t| (t as f64, curve.value(t)))
            .collect(),
    );
    chart.add_series(
        "fading + baseline",
        PALETTE[3],
        range
            .clone()
            .map(|t| {
                let d = decompose(params, t as f64);
                (t as f64, (d.communicative + d.cultural).log10())
            })
            .collect(),
    );
    chart.add_series(
        "fading component",
        PALETTE[1],
        range
            .clone()
            .map(|t| (t as f64, params.communicative(t as f64).log10()))
            .collect(),
    );
    chart.add_series(
        "baseline",
        PALETTE[2],
        range.map(|t| (t as f64, params.cultural().log10())).collect(),
    );
    chart.write(path)
}
