//! Regression machinery for boost outcomes: dummy-coded design matrices over
//! biographic factors, OLS with the usual inference, rank scaling, the
//! Wilcoxon signed-rank test, and bootstrap confidence intervals for medians.

mod bootstrap;
mod ols;
mod wilcoxon;

pub use bootstrap::bootstrap_median_ci;
pub use ols::{ols_fit, CoefEntry, OlsFit};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Medium, PersonId};

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("rank scaling needs at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error("design matrix is rank deficient; collinear columns: {0:?}")]
    RankDeficient(Vec<String>),
    #[error("need more observations than columns: n = {n}, p = {p}")]
    TooFewObservations { n: usize, p: usize },
    #[error("no person has all factor levels defined")]
    EmptyDesign,
    #[error("all paired differences are zero; test undefined")]
    AllZeroDifferences,
    #[error("bootstrap needs n >= 2 and B >= 1000, got n = {n}, B = {b}")]
    BadBootstrapInput { n: usize, b: usize },
    #[error("design mismatch: {0}")]
    DesignMismatch(String),
}

/// Age at death, bracketed by decade. Reference level: 70-79, which holds
/// the mean and median age at death.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgeBracket {
    A20s,
    A30s,
    A40s,
    A50s,
    A60s,
    A70s,
    A80s,
    A90s,
}

impl AgeBracket {
    pub const ALL: [AgeBracket; 8] = [
        AgeBracket::A20s,
        AgeBracket::A30s,
        AgeBracket::A40s,
        AgeBracket::A50s,
        AgeBracket::A60s,
        AgeBracket::A70s,
        AgeBracket::A80s,
        AgeBracket::A90s,
    ];
    pub const REFERENCE: AgeBracket = AgeBracket::A70s;

    pub fn from_age(age: u32) -> Option<AgeBracket> {
        match age {
            20..=29 => Some(AgeBracket::A20s),
            30..=39 => Some(AgeBracket::A30s),
            40..=49 => Some(AgeBracket::A40s),
            50..=59 => Some(AgeBracket::A50s),
            60..=69 => Some(AgeBracket::A60s),
            70..=79 => Some(AgeBracket::A70s),
            80..=89 => Some(AgeBracket::A80s),
            90..=99 => Some(AgeBracket::A90s),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AgeBracket::A20s => "20-29",
            AgeBracket::A30s => "30-39",
            AgeBracket::A40s => "40-49",
            AgeBracket::A50s => "50-59",
            AgeBracket::A60s => "60-69",
            AgeBracket::A70s => "70-79",
            AgeBracket::A80s => "80-89",
            AgeBracket::A90s => "90-99",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manner {
    Natural,
    Unnatural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Notability {
    Arts,
    Sports,
    Leadership,
    KnownForDeath,
    GeneralFame,
    AcademiaEngineering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    Anglophone,
    NonAnglophone,
    Unknown,
}

pub fn parse_gender(s: &str) -> Option<Gender> {
    match s {
        "male" => Some(Gender::Male),
        "female" => Some(Gender::Female),
        _ => None,
    }
}

pub fn parse_manner(s: &str) -> Option<Manner> {
    match s {
        "natural" => Some(Manner::Natural),
        "unnatural" => Some(Manner::Unnatural),
        _ => None,
    }
}

pub fn parse_notability(s: &str) -> Option<Notability> {
    match s {
        "arts" => Some(Notability::Arts),
        "sports" => Some(Notability::Sports),
        "leadership" => Some(Notability::Leadership),
        "known_for_death" => Some(Notability::KnownForDeath),
        "general_fame" => Some(Notability::GeneralFame),
        "academia_engineering" => Some(Notability::AcademiaEngineering),
        _ => None,
    }
}

pub fn parse_language(s: &str) -> Option<Language> {
    match s {
        "anglophone" => Some(Language::Anglophone),
        "non_anglophone" => Some(Language::NonAnglophone),
        "unknown" => Some(Language::Unknown),
        _ => None,
    }
}

/// Per-medium boost outcomes for one person.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct MediumOutcomes {
    pub pre_mean: f64,
    pub short_boost: f64,
    pub long_boost: f64,
}

/// One person's regression inputs. Factor fields are `None` when the
/// registry value is missing or outside the defined levels; such persons are
/// excluded from the design.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionPerson {
    pub person_id: PersonId,
    pub age: Option<AgeBracket>,
    pub gender: Option<Gender>,
    pub manner: Option<Manner>,
    pub notability: Option<Notability>,
    pub language: Option<Language>,
    pub news: MediumOutcomes,
    pub twitter: MediumOutcomes,
}

/// Which outcome a model explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    ShortBoost,
    LongBoost,
    /// News-minus-Twitter difference in short-term boosts.
    DiffShort,
    /// News-minus-Twitter difference in long-term boosts.
    DiffLong,
}

/// Model specification. Reference levels are fixed so the intercept captures
/// a male anglophone artist of median pre-mortem popularity who died a
/// natural death at age 70-79.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub outcome: Outcome,
    /// Source medium for the per-medium outcomes; ignored for differences.
    pub medium: Medium,
    pub include_age_manner_interaction: bool,
}

/// Design matrix with metadata needed for reporting and contrasts.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub column_names: Vec<String>,
    pub included: Vec<PersonId>,
    pub excluded: Vec<(PersonId, String)>,
    /// Persons per (age bracket, manner) cell, for identifiability checks.
    pub age_manner_cells: [[usize; 2]; 8],
    pub spec: RegressionSpec,
}

/// Ranks mapped affinely onto `[-0.5, 0.5]`: `(rank - 1) / (n - 1) - 0.5`,
/// with ties sharing their average rank.
pub fn rank_scale(values: &[f64]) -> Result<Vec<f64>, RegressError> {
    let n = values.len();
    if n < 2 {
        return Err(RegressError::TooFewValues(n));
    }
    let ranks = average_ranks(values);
    Ok(ranks
        .into_iter()
        .map(|r| (r - 1.0) / (n as f64 - 1.0) - 0.5)
        .collect())
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn age_index(age: AgeBracket) -> usize {
    AgeBracket::ALL.iter().position(|&a| a == age).unwrap()
}

/// Non-reference age brackets in reporting order.
fn age_dummies() -> Vec<AgeBracket> {
    AgeBracket::ALL
        .iter()
        .copied()
        .filter(|&a| a != AgeBracket::REFERENCE)
        .collect()
}

const NOTABILITY_DUMMIES: [(Notability, &str); 5] = [
    (Notability::AcademiaEngineering, "notability_academia_engineering"),
    (Notability::GeneralFame, "notability_general_fame"),
    (Notability::KnownForDeath, "notability_known_for_death"),
    (Notability::Leadership, "notability_leadership"),
    (Notability::Sports, "notability_sports"),
];

/// Build the dummy-coded design matrix for `spec` over the persons with all
/// factor levels defined.
///
/// Columns: intercept, rank-scaled pre-mortem mean (news-minus-Twitter
/// rank-scale difference for difference outcomes), manner, language (2),
/// gender, notability (5), age (7), plus age-by-manner products when the
/// interaction is enabled.
pub fn build_design(
    persons: &[RegressionPerson],
    spec: &RegressionSpec,
) -> Result<Design, RegressError> {
    let mut included_idx = Vec::new();
    let mut excluded = Vec::new();
    for (i, p) in persons.iter().enumerate() {
        let missing = if p.age.is_none() {
            Some("age outside the defined brackets")
        } else if p.gender.is_none() {
            Some("gender undefined")
        } else if p.manner.is_none() {
            Some("manner of death undefined")
        } else if p.notability.is_none() {
            Some("notability type undefined")
        } else if p.language.is_none() {
            Some("language group undefined")
        } else {
            None
        };
        match missing {
            Some(reason) => excluded.push((p.person_id.clone(), reason.to_owned())),
            None => included_idx.push(i),
        }
    }
    if included_idx.is_empty() {
        return Err(RegressError::EmptyDesign);
    }

    // Rank-scaled popularity predictor over the included persons.
    let news_pre: Vec<f64> = included_idx.iter().map(|&i| persons[i].news.pre_mean).collect();
    let twitter_pre: Vec<f64> =
        included_idx.iter().map(|&i| persons[i].twitter.pre_mean).collect();
    let popularity: Vec<f64> = match spec.outcome {
        Outcome::ShortBoost | Outcome::LongBoost => {
            let per_medium = match spec.medium {
                Medium::News => &news_pre,
                Medium::Twitter => &twitter_pre,
            };
            rank_scale(per_medium)?
        }
        Outcome::DiffShort | Outcome::DiffLong => {
            let news_scaled = rank_scale(&news_pre)?;
            let twitter_scaled = rank_scale(&twitter_pre)?;
            news_scaled
                .iter()
                .zip(&twitter_scaled)
                .map(|(n, t)| n - t)
                .collect()
        }
    };

    let popularity_name = match spec.outcome {
        Outcome::ShortBoost | Outcome::LongBoost => "pre_mean_rank",
        Outcome::DiffShort | Outcome::DiffLong => "pre_mean_rank_diff",
    };
    let mut column_names: Vec<String> = vec!["intercept".into(), popularity_name.into()];
    column_names.push("manner_unnatural".into());
    column_names.push("language_non_anglophone".into());
    column_names.push("language_unknown".into());
    column_names.push("gender_female".into());
    for (_, name) in NOTABILITY_DUMMIES {
        column_names.push(name.into());
    }
    for age in age_dummies() {
        column_names.push(format!("age_{}", age.label().replace('-', "_")));
    }
    if spec.include_age_manner_interaction {
        for age in age_dummies() {
            column_names.push(format!(
                "age_{}:manner_unnatural",
                age.label().replace('-', "_")
            ));
        }
    }

    let n = included_idx.len();
    let p = column_names.len();
    let mut x = DMatrix::zeros(n, p);
    let mut y = DVector::zeros(n);
    let mut age_manner_cells = [[0usize; 2]; 8];

    for (row, (&idx, pop)) in included_idx.iter().zip(&popularity).enumerate() {
        let person = &persons[idx];
        let age = person.age.unwrap();
        let manner = person.manner.unwrap();
        age_manner_cells[age_index(age)][(manner == Manner::Unnatural) as usize] += 1;

        let mut col = 0;
        x[(row, col)] = 1.0;
        col += 1;
        x[(row, col)] = *pop;
        col += 1;
        x[(row, col)] = f64::from(manner == Manner::Unnatural);
        col += 1;
        x[(row, col)] = f64::from(person.language.unwrap() == Language::NonAnglophone);
        col += 1;
        x[(row, col)] = f64::from(person.language.unwrap() == Language::Unknown);
        col += 1;
        x[(row, col)] = f64::from(person.gender.unwrap() == Gender::Female);
        col += 1;
        for (level, _) in NOTABILITY_DUMMIES {
            x[(row, col)] = f64::from(person.notability.unwrap() == level);
            col += 1;
        }
        for bracket in age_dummies() {
            x[(row, col)] = f64::from(age == bracket);
            col += 1;
        }
        if spec.include_age_manner_interaction {
            for bracket in age_dummies() {
                x[(row, col)] =
                    f64::from(age == bracket && manner == Manner::Unnatural);
                col += 1;
            }
        }
        debug_assert_eq!(col, p);

        y[row] = match spec.outcome {
            Outcome::ShortBoost => match spec.medium {
                Medium::News => person.news.short_boost,
                Medium::Twitter => person.twitter.short_boost,
            },
            Outcome::LongBoost => match spec.medium {
                Medium::News => person.news.long_boost,
                Medium::Twitter => person.twitter.long_boost,
            },
            Outcome::DiffShort => person.news.short_boost - person.twitter.short_boost,
            Outcome::DiffLong => person.news.long_boost - person.twitter.long_boost,
        };
    }

    Ok(Design {
        x,
        y,
        column_names,
        included: included_idx.iter().map(|&i| persons[i].person_id.clone()).collect(),
        excluded,
        age_manner_cells,
        spec: *spec,
    })
}

/// Estimated outcome for the baseline persona in one (age, manner) cell of
/// the interaction model, with its standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgeEffect {
    pub age: AgeBracket,
    pub manner: Manner,
    pub estimate: f64,
    pub std_error: f64,
    /// False when the design has no person in this cell.
    pub identifiable: bool,
}

/// Per-(age, manner) estimates from a fitted interaction model, as linear
/// combinations of coefficients with errors from the coefficient covariance.
pub fn age_effect_curves(design: &Design, fit: &OlsFit) -> Result<Vec<AgeEffect>, RegressError> {
    if !design.spec.include_age_manner_interaction {
        return Err(RegressError::DesignMismatch(
            "age effect curves need the age-by-manner interaction model".into(),
        ));
    }
    if fit.coefficients.len() != design.column_names.len() {
        return Err(RegressError::DesignMismatch(
            "fit and design have different column counts".into(),
        ));
    }
    let p = design.column_names.len();
    let col = |name: &str| design.column_names.iter().position(|c| c == name);

    let mut out = Vec::new();
    for age in AgeBracket::ALL {
        for manner in [Manner::Natural, Manner::Unnatural] {
            let mut contrast = DVector::zeros(p);
            contrast[0] = 1.0;
            if age != AgeBracket::REFERENCE {
                let name = format!("age_{}", age.label().replace('-', "_"));
                contrast[col(&name).expect("age column")] = 1.0;
            }
            if manner == Manner::Unnatural {
                contrast[col("manner_unnatural").expect("manner column")] = 1.0;
                if age != AgeBracket::REFERENCE {
                    let name =
                        format!("age_{}:manner_unnatural", age.label().replace('-', "_"));
                    contrast[col(&name).expect("interaction column")] = 1.0;
                }
            }
            let estimate = fit
                .coefficients
                .iter()
                .zip(contrast.iter())
                .map(|(c, w)| c.estimate * w)
                .sum();
            let variance = (contrast.transpose() * &fit.covariance * &contrast)[(0, 0)];
            out.push(AgeEffect {
                age,
                manner,
                estimate,
                std_error: variance.max(0.0).sqrt(),
                identifiable: design.age_manner_cells[age_index(age)]
                    [(manner == Manner::Unnatural) as usize]
                    > 0,
            });
        }
    }
    Ok(out)
}
