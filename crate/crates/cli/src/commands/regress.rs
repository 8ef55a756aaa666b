//! `regress`: features + registry -> coefficient tables for the four
//! per-medium boost models and the two news-minus-Twitter difference models,
//! age-by-manner effect curves, and a boost summary with medians, bootstrap
//! confidence intervals, and the paired Wilcoxon tests.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;
use serde_json::json;

use memdecay_core::corpus::{Medium, PersonId, PersonRecord};
use memdecay_core::features::{boost_ratio, CurveFeatures};
use memdecay_core::regress::{
    age_effect_curves, bootstrap_median_ci, build_design, ols_fit, parse_gender, parse_language,
    parse_manner, parse_notability, wilcoxon_signed_rank, AgeBracket, MediumOutcomes, OlsFit,
    Outcome, RegressionPerson, RegressionSpec,
};

use crate::commands::stage_error;
use crate::config::{OutPaths, RunConfig};
use crate::formats;
use crate::{input_error, Failure};

pub fn run(
    features_path: &Path,
    registry_path: &Path,
    out: &Path,
    config: &RunConfig,
) -> Result<(), Failure> {
    let features = formats::read_features(features_path).map_err(input_error)?;
    let registry = formats::read_registry(registry_path).map_err(input_error)?;
    let paths = OutPaths::new(out).map_err(input_error)?;
    build(&features, &registry, &paths, config)
}

fn join_inputs(
    features: &[CurveFeatures],
    registry: &[PersonRecord],
) -> (Vec<RegressionPerson>, Vec<PersonId>) {
    let mut by_person: BTreeMap<PersonId, (Option<MediumOutcomes>, Option<MediumOutcomes>)> =
        BTreeMap::new();
    for f in features {
        let slot = by_person.entry(f.person_id.clone()).or_default();
        let outcomes = MediumOutcomes {
            pre_mean: f.pre_mean,
            short_boost: f.short_boost,
            long_boost: f.long_boost,
        };
        match f.medium {
            Medium::News => slot.0 = Some(outcomes),
            Medium::Twitter => slot.1 = Some(outcomes),
        }
    }

    let mut persons = Vec::new();
    let mut missing_medium = Vec::new();
    for record in registry {
        let Some((Some(news), Some(twitter))) = by_person.get(&record.id).copied() else {
            if by_person.contains_key(&record.id) {
                missing_medium.push(record.id.clone());
            }
            continue;
        };
        persons.push(RegressionPerson {
            person_id: record.id.clone(),
            age: record.age_at_death.and_then(AgeBracket::from_age),
            gender: record.gender.as_deref().and_then(parse_gender),
            manner: record.manner_of_death.as_deref().and_then(parse_manner),
            notability: record.notability_type.as_deref().and_then(parse_notability),
            language: record.language_group.as_deref().and_then(parse_language),
            news,
            twitter,
        });
    }
    (persons, missing_medium)
}

const MODELS: [(Outcome, Medium, &str); 6] = [
    (Outcome::ShortBoost, Medium::News, "short_news"),
    (Outcome::ShortBoost, Medium::Twitter, "short_twitter"),
    (Outcome::LongBoost, Medium::News, "long_news"),
    (Outcome::LongBoost, Medium::Twitter, "long_twitter"),
    (Outcome::DiffShort, Medium::News, "diff_short"),
    (Outcome::DiffLong, Medium::News, "diff_long"),
];

pub fn build(
    features: &[CurveFeatures],
    registry: &[PersonRecord],
    paths: &OutPaths,
    config: &RunConfig,
) -> Result<(), Failure> {
    let (persons, missing_medium) = join_inputs(features, registry);
    if persons.is_empty() {
        return Err(stage_error(
            "regress",
            anyhow!("no person has features in both media"),
        ));
    }

    let mut fitted = 0usize;
    let mut failures = Vec::new();
    for (outcome, medium, tag) in MODELS {
        let spec = RegressionSpec {
            outcome,
            medium,
            include_age_manner_interaction: false,
        };
        match fit_one(&persons, &spec) {
            Ok((fit, n_excluded)) => {
                write_coefficients(&paths.file(&format!("coefficients_{tag}.csv")), &fit)
                    .map_err(|e| stage_error("regress", e))?;
                eprintln!(
                    "regress: {tag} n = {} (r2 {:.3}, {} persons outside defined levels)",
                    fit.n, fit.r2, n_excluded
                );
                fitted += 1;
            }
            Err(err) => {
                eprintln!("regress: {tag} failed: {err}");
                failures.push(json!({ "model": tag, "error": err.to_string() }));
            }
        }

        // Interaction variant for the age-effect curves.
        let interaction_spec = RegressionSpec {
            include_age_manner_interaction: true,
            ..spec
        };
        match fit_one_with_curves(&persons, &interaction_spec) {
            Ok(curves) => {
                write_age_effects(&paths.file(&format!("age_effects_{tag}.csv")), &curves)
                    .map_err(|e| stage_error("regress", e))?;
            }
            Err(err) => {
                failures.push(json!({ "model": format!("{tag}_interaction"), "error": err.to_string() }));
            }
        }
    }
    if fitted == 0 {
        return Err(stage_error(
            "regress",
            anyhow!("all regression models failed; see the boost summary for details"),
        ));
    }

    // Boost medians, bootstrap CIs, cross-media Wilcoxon tests.
    let summary = boost_summary(&persons, config, &missing_medium, failures)
        .map_err(|e| stage_error("regress", e))?;
    formats::write_json(&paths.boost_summary(), &summary)
        .map_err(|e| stage_error("regress", e))?;
    Ok(())
}

fn fit_one(
    persons: &[RegressionPerson],
    spec: &RegressionSpec,
) -> anyhow::Result<(OlsFit, usize)> {
    let design = build_design(persons, spec)?;
    let fit = ols_fit(&design.x, &design.y, &design.column_names)?;
    Ok((fit, design.excluded.len()))
}

fn fit_one_with_curves(
    persons: &[RegressionPerson],
    spec: &RegressionSpec,
) -> anyhow::Result<Vec<memdecay_core::regress::AgeEffect>> {
    let design = build_design(persons, spec)?;
    let fit = ols_fit(&design.x, &design.y, &design.column_names)?;
    Ok(age_effect_curves(&design, &fit)?)
}

/// Coefficient table: `term,estimate,std_error,p_value` plus footer rows.
fn write_coefficients(path: &Path, fit: &OlsFit) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["term", "estimate", "std_error", "p_value"])?;
    for coef in &fit.coefficients {
        out.write_record([
            coef.name.as_str(),
            &coef.estimate.to_string(),
            &coef.std_error.to_string(),
            &coef.p_value.to_string(),
        ])?;
    }
    for (name, value) in [
        ("r2", fit.r2),
        ("adj_r2", fit.adj_r2),
        ("n", fit.n as f64),
        ("rmse", fit.rmse),
        ("f_stat", fit.f_statistic),
        ("f_p", fit.f_p_value),
    ] {
        out.write_record([name, &value.to_string(), "", ""])?;
    }
    out.flush()?;
    Ok(())
}

fn write_age_effects(
    path: &Path,
    curves: &[memdecay_core::regress::AgeEffect],
) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["age", "manner", "estimate", "std_error", "lo_2se", "hi_2se", "identifiable"])?;
    for effect in curves {
        out.write_record([
            effect.age.label(),
            match effect.manner {
                memdecay_core::regress::Manner::Natural => "natural",
                memdecay_core::regress::Manner::Unnatural => "unnatural",
            },
            &effect.estimate.to_string(),
            &effect.std_error.to_string(),
            &(effect.estimate - 2.0 * effect.std_error).to_string(),
            &(effect.estimate + 2.0 * effect.std_error).to_string(),
            if effect.identifiable { "true" } else { "false" },
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn median_of(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn boost_summary(
    persons: &[RegressionPerson],
    config: &RunConfig,
    missing_medium: &[PersonId],
    failures: Vec<serde_json::Value>,
) -> anyhow::Result<serde_json::Value> {
    let mut media_summaries = BTreeMap::new();
    for (medium, pick) in [
        (Medium::News, &(|p: &RegressionPerson| p.news) as &dyn Fn(&RegressionPerson) -> MediumOutcomes),
        (Medium::Twitter, &|p: &RegressionPerson| p.twitter),
    ] {
        let shorts: Vec<f64> = persons.iter().map(|p| pick(p).short_boost).collect();
        let longs: Vec<f64> = persons.iter().map(|p| pick(p).long_boost).collect();
        let short_median = median_of(shorts.clone());
        let long_median = median_of(longs.clone());
        let short_ci =
            bootstrap_median_ci(&shorts, config.bootstrap_replicates, config.seed, 0.95)?;
        let long_ci = bootstrap_median_ci(&longs, config.bootstrap_replicates, config.seed, 0.95)?;
        media_summaries.insert(
            medium.as_str().to_owned(),
            json!({
                "short_boost_median": short_median,
                "short_boost_ci95": short_ci,
                "short_boost_ratio": boost_ratio(short_median),
                "long_boost_median": long_median,
                "long_boost_ci95": long_ci,
                "long_boost_ratio": boost_ratio(long_median),
                "n": persons.len(),
            }),
        );
    }

    let short_diffs: Vec<f64> = persons
        .iter()
        .map(|p| p.twitter.short_boost - p.news.short_boost)
        .collect();
    let long_diffs: Vec<f64> = persons
        .iter()
        .map(|p| p.twitter.long_boost - p.news.long_boost)
        .collect();
    let wilcoxon = |diffs: &[f64]| -> anyhow::Result<serde_json::Value> {
        match wilcoxon_signed_rank(diffs) {
            Ok(result) => Ok(json!({
                "w": result.w,
                "two_sided_p": result.two_sided_p,
                "n_used": result.n_used,
                "exact": result.exact,
            })),
            Err(err) => Ok(json!({ "error": err.to_string() })),
        }
    };

    Ok(json!({
        "media": media_summaries,
        "twitter_minus_news_short_wilcoxon": wilcoxon(&short_diffs)?,
        "twitter_minus_news_long_wilcoxon": wilcoxon(&long_diffs)?,
        "bootstrap_replicates": config.bootstrap_replicates,
        "seed": config.seed,
        "persons_missing_one_medium": missing_medium,
        "regression_failures": failures,
    }))
}
