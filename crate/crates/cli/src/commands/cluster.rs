//! `cluster`: feature vectors -> per-medium k selection and clustering, plus
//! the cross-media confusion analysis when both media are present.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;
use serde_json::json;

use memdecay_core::cluster::{
    chi2_independence, confusion, expected_trace, proportions_test, select_k, trace_bounds,
    FeatureMatrix, KSelection,
};
use memdecay_core::corpus::{Medium, PersonId};
use memdecay_core::features::CurveFeatures;

use crate::commands::stage_error;
use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::svg::{LineChart, PALETTE};
use crate::{input_error, Failure};

pub fn run(features_path: &Path, out: &Path, config: &RunConfig) -> Result<(), Failure> {
    let features = formats::read_features(features_path).map_err(input_error)?;
    let paths = OutPaths::new(out).map_err(input_error)?;
    build(&features, &paths, config)
}

pub fn build(
    features: &[CurveFeatures],
    paths: &OutPaths,
    config: &RunConfig,
) -> Result<(), Failure> {
    let mut selections: Vec<(Medium, KSelection, FeatureMatrix)> = Vec::new();
    let mut curve_chart = LineChart::new(
        "Mean silhouette by number of clusters",
        "k",
        "mean silhouette",
    );

    for (i, medium) in config.media.media().into_iter().enumerate() {
        let medium_features: Vec<CurveFeatures> = features
            .iter()
            .filter(|f| f.medium == medium)
            .cloned()
            .collect();
        if medium_features.is_empty() {
            return Err(stage_error(
                "cluster",
                anyhow!("no feature rows for {medium}"),
            ));
        }
        let matrix =
            FeatureMatrix::from_features(&medium_features).map_err(|e| stage_error("cluster", e))?;

        // Honor the precondition n > k by clamping the range to the data.
        let k_max = config.k_max.min(matrix.len().saturating_sub(1));
        if config.k_min < 2 || config.k_min > k_max {
            return Err(stage_error(
                "cluster",
                anyhow!(
                    "k range [{}, {}] is unusable for {} points",
                    config.k_min,
                    config.k_max,
                    matrix.len()
                ),
            ));
        }
        let selection = select_k(
            &matrix,
            config.k_min..=k_max,
            config.seed,
            config.kmeans_restarts,
        )
        .map_err(|e| stage_error("cluster", e))?;

        curve_chart.add_series(
            medium.as_str(),
            PALETTE[1 + i % 4],
            selection
                .curve
                .iter()
                .map(|&(k, s)| (k as f64, s))
                .collect(),
        );

        write_assignments(&paths.assignments(medium), &matrix, &selection)
            .map_err(|e| stage_error("cluster", e))?;
        let destandardized: Vec<[f64; 4]> = selection
            .best
            .centroids
            .iter()
            .map(|c| matrix.destandardize(c))
            .collect();
        let report = json!({
            "medium": medium,
            "k_curve": selection.curve,
            "best_k": selection.best_k,
            "sizes": selection.best.sizes,
            "mean_silhouette": selection.best.mean_silhouette,
            "centroids_standardized": selection.best.centroids,
            "centroids": destandardized,
            "feature_means": matrix.means,
            "feature_stds": matrix.stds,
            "assignments_path": paths.assignments(medium).file_name().map(|n| n.to_string_lossy().into_owned()),
            "kmeans_restarts": config.kmeans_restarts,
            "seed": config.seed,
        });
        formats::write_json(&paths.cluster_report(medium), &report)
            .map_err(|e| stage_error("cluster", e))?;
        eprintln!(
            "cluster: {medium} best k = {} (silhouette {:.3}), sizes {:?}",
            selection.best_k, selection.best.mean_silhouette, selection.best.sizes
        );
        selections.push((medium, selection, matrix));
    }

    curve_chart
        .write(&paths.silhouette_plot())
        .map_err(|e| stage_error("cluster", e))?;

    if selections.len() < 2 {
        eprintln!("cluster: single-medium run, skipping the confusion analysis");
        return Ok(());
    }

    // Cross-media agreement over the common person set.
    let assignment_map = |selection: &KSelection, matrix: &FeatureMatrix| {
        matrix
            .persons
            .iter()
            .cloned()
            .zip(selection.best.assignments.iter().copied())
            .collect::<BTreeMap<PersonId, usize>>()
    };
    let (m1, s1, x1) = &selections[0];
    let (m2, s2, x2) = &selections[1];
    let news_map = assignment_map(s1, x1);
    let twitter_map = assignment_map(s2, x2);
    let matrix = confusion(&news_map, &twitter_map, s1.best_k, s2.best_k)
        .map_err(|e| stage_error("cluster", e))?;
    let chi2 = chi2_independence(&matrix).map_err(|e| stage_error("cluster", e))?;
    // Trace analysis needs matching cluster counts on both sides.
    let (expected, min_trace, max_trace) = if s1.best_k == s2.best_k {
        let expected = expected_trace(&matrix.row_marginals, &matrix.col_marginals)
            .map_err(|e| stage_error("cluster", e))?;
        let (lo, hi) = trace_bounds(&matrix.row_marginals, &matrix.col_marginals)
            .map_err(|e| stage_error("cluster", e))?;
        (Some(expected), Some(lo), Some(hi))
    } else {
        eprintln!(
            "cluster: media selected different k ({} vs {}); trace analysis skipped",
            s1.best_k, s2.best_k
        );
        (None, None, None)
    };

    // Per-cell one-sample proportions tests against the independence rates.
    let n = matrix.n;
    let mut cell_tests = Vec::new();
    for i in 0..matrix.rows() {
        for j in 0..matrix.cols() {
            let p0 = matrix.row_marginals[i] as f64 * matrix.col_marginals[j] as f64
                / (n as f64 * n as f64);
            if !(p0 > 0.0 && p0 < 1.0) {
                continue;
            }
            let test = proportions_test(matrix.counts[i][j], n, p0)
                .map_err(|e| stage_error("cluster", e))?;
            cell_tests.push(json!({
                "row_cluster": i + 1,
                "col_cluster": j + 1,
                "count": matrix.counts[i][j],
                "expected": p0 * n as f64,
                "statistic": test.statistic,
                "p_value": test.p_value,
            }));
        }
    }

    let report = json!({
        "matrix": matrix.counts,
        "row_medium": m1,
        "col_medium": m2,
        "row_marginals": matrix.row_marginals,
        "col_marginals": matrix.col_marginals,
        "n": n,
        "chi2": chi2.statistic,
        "dof": chi2.dof,
        "p": chi2.p_value,
        "trace": matrix.trace(),
        "expected_trace": expected,
        "min_trace": min_trace,
        "max_trace": max_trace,
        "cell_proportions_tests": cell_tests,
    });
    formats::write_json(&paths.confusion_report(), &report)
        .map_err(|e| stage_error("cluster", e))?;
    match (expected, min_trace, max_trace) {
        (Some(e), Some(lo), Some(hi)) => eprintln!(
            "cluster: confusion trace {} (expected {e:.1}, bounds [{lo}, {hi}])",
            matrix.trace()
        ),
        _ => eprintln!("cluster: confusion trace {}", matrix.trace()),
    }
    Ok(())
}

fn write_assignments(
    path: &Path,
    matrix: &FeatureMatrix,
    selection: &KSelection,
) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["person_id", "cluster"])?;
    for (person, &label) in matrix.persons.iter().zip(&selection.best.assignments) {
        out.write_record([person.as_str(), &format!("C{}", label + 1)])?;
    }
    out.flush()?;
    Ok(())
}
