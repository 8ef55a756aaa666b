//! Inclusion criteria for the study population.

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use serde::Serialize;

use super::{CorpusError, CorpusWindow, DailyMentionCounts, Medium, PersonId, PersonRecord};

/// Days immediately after death that must be free of missing corpus days.
const POST_MORTEM_GUARD_DAYS: i64 = 100;
/// Distance to either corpus boundary a death must keep.
const BOUNDARY_DAYS: i64 = 360;
/// Minimum distinct pre-mortem mention days required in each medium.
const MIN_PRE_MORTEM_DAYS: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExclusionReason {
    /// A missing corpus day falls into the 100 days following death.
    MissingDataAfterDeath { day: NaiveDate },
    /// Death within 360 days of a corpus boundary.
    Boundary,
    /// Mentioned on fewer than five distinct days in news or Twitter during
    /// the 360 days before death.
    SparsePreMortem { news_days: u32, twitter_days: u32 },
    /// A registered name contains parentheses, e.g. a disambiguation suffix.
    ParenthesizedName { surface: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct InclusionReport {
    pub included: Vec<PersonId>,
    pub excluded: Vec<(PersonId, ExclusionReason)>,
}

/// Apply the inclusion criteria to the registry.
///
/// `missing_days` are corpus days with no data at all (collection outages).
/// A person with no death date makes the whole registry invalid.
pub fn apply_inclusion_criteria(
    persons: &[PersonRecord],
    counts: &DailyMentionCounts,
    missing_days: &BTreeSet<NaiveDate>,
    window: &CorpusWindow,
) -> Result<InclusionReport, CorpusError> {
    let mut included = Vec::new();
    let mut excluded = Vec::new();

    for person in persons {
        let death = person
            .death_date
            .ok_or_else(|| CorpusError::MissingDeathDate(person.id.clone()))?;

        if let Some(&day) = missing_days
            .range(death..death + Duration::days(POST_MORTEM_GUARD_DAYS))
            .next()
        {
            excluded.push((person.id.clone(), ExclusionReason::MissingDataAfterDeath { day }));
            continue;
        }

        let from_start = (death - window.start).num_days();
        let to_end = (window.end - death).num_days();
        if from_start < BOUNDARY_DAYS || to_end < BOUNDARY_DAYS {
            excluded.push((person.id.clone(), ExclusionReason::Boundary));
            continue;
        }

        let pre_start = death - Duration::days(360);
        let pre_end = death - Duration::days(1);
        let news_days = counts.mention_day_count(&person.id, Medium::News, pre_start, pre_end);
        let twitter_days =
            counts.mention_day_count(&person.id, Medium::Twitter, pre_start, pre_end);
        if news_days < MIN_PRE_MORTEM_DAYS || twitter_days < MIN_PRE_MORTEM_DAYS {
            excluded.push((
                person.id.clone(),
                ExclusionReason::SparsePreMortem {
                    news_days,
                    twitter_days,
                },
            ));
            continue;
        }

        if let Some(alias) = person
            .names
            .iter()
            .find(|a| a.surface.contains('(') || a.surface.contains(')'))
        {
            excluded.push((
                person.id.clone(),
                ExclusionReason::ParenthesizedName {
                    surface: alias.surface.clone(),
                },
            ));
            continue;
        }

        included.push(person.id.clone());
    }

    Ok(InclusionReport { included, excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AliasEntry, AliasKind};

    fn day(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn window() -> CorpusWindow {
        CorpusWindow::new(day("2009-06-11"), day("2014-09-30"))
    }

    fn person(id: &str, death: Option<&str>, surfaces: &[&str]) -> PersonRecord {
        PersonRecord {
            id: PersonId::new(id),
            names: surfaces
                .iter()
                .map(|s| AliasEntry {
                    surface: (*s).to_owned(),
                    share: 0.99,
                    kind: AliasKind::FullName,
                })
                .collect(),
            death_date: death.map(day),
            age_at_death: None,
            gender: None,
            manner_of_death: None,
            notability_type: None,
            language_group: None,
        }
    }

    /// Counts with `n` distinct pre-mortem mention days per medium.
    fn counts_with_days(id: &str, death: &str, news_days: u32, twitter_days: u32) -> DailyMentionCounts {
        let death = day(death);
        let mut counts = DailyMentionCounts::new();
        for i in 0..news_days {
            let d = death - Duration::days(1 + i as i64);
            counts.set_mention(PersonId::new(id), Medium::News, d, 3);
            counts.set_total(Medium::News, d, 100);
        }
        for i in 0..twitter_days {
            let d = death - Duration::days(1 + i as i64);
            counts.set_mention(PersonId::new(id), Medium::Twitter, d, 3);
            counts.set_total(Medium::Twitter, d, 100);
        }
        counts
    }

    #[test]
    fn death_near_corpus_end_is_boundary_excluded() {
        let persons = vec![person("p", Some("2014-08-11"), &["Prominent Person"])];
        let counts = counts_with_days("p", "2014-08-11", 40, 40);
        let report =
            apply_inclusion_criteria(&persons, &counts, &BTreeSet::new(), &window()).unwrap();
        assert_eq!(report.excluded, vec![(PersonId::new("p"), ExclusionReason::Boundary)]);
    }

    #[test]
    fn sparse_news_presence_excludes_despite_heavy_twitter() {
        let persons = vec![person("p", Some("2012-06-01"), &["Prominent Person"])];
        let counts = counts_with_days("p", "2012-06-01", 4, 300);
        let report =
            apply_inclusion_criteria(&persons, &counts, &BTreeSet::new(), &window()).unwrap();
        assert_eq!(
            report.excluded,
            vec![(
                PersonId::new("p"),
                ExclusionReason::SparsePreMortem {
                    news_days: 4,
                    twitter_days: 300
                }
            )]
        );
    }

    #[test]
    fn parenthesized_name_excludes() {
        let persons = vec![person(
            "spence",
            Some("2012-06-01"),
            &["John Spence", "John Spence (Trinidad politician)"],
        )];
        let counts = counts_with_days("spence", "2012-06-01", 10, 10);
        let report =
            apply_inclusion_criteria(&persons, &counts, &BTreeSet::new(), &window()).unwrap();
        assert!(matches!(
            report.excluded[0].1,
            ExclusionReason::ParenthesizedName { .. }
        ));
    }

    #[test]
    fn missing_day_shortly_after_death_excludes() {
        let persons = vec![person("p", Some("2012-06-01"), &["Prominent Person"])];
        let counts = counts_with_days("p", "2012-06-01", 10, 10);
        let mut missing = BTreeSet::new();
        missing.insert(day("2012-08-15")); // 75 days after death
        let report = apply_inclusion_criteria(&persons, &counts, &missing, &window()).unwrap();
        assert!(matches!(
            report.excluded[0].1,
            ExclusionReason::MissingDataAfterDeath { .. }
        ));

        // A missing day beyond the 100-day guard is irrelevant.
        let mut missing_far = BTreeSet::new();
        missing_far.insert(day("2012-11-01"));
        let report =
            apply_inclusion_criteria(&persons, &counts, &missing_far, &window()).unwrap();
        assert_eq!(report.included, vec![PersonId::new("p")]);
    }

    #[test]
    fn missing_death_date_is_a_hard_error() {
        let persons = vec![person("p", None, &["Prominent Person"])];
        let counts = DailyMentionCounts::new();
        assert!(matches!(
            apply_inclusion_criteria(&persons, &counts, &BTreeSet::new(), &window()),
            Err(CorpusError::MissingDeathDate(_))
        ));
    }

    #[test]
    fn well_covered_person_is_included() {
        let persons = vec![person("p", Some("2012-06-01"), &["Prominent Person"])];
        let counts = counts_with_days("p", "2012-06-01", 10, 10);
        let report =
            apply_inclusion_criteria(&persons, &counts, &BTreeSet::new(), &window()).unwrap();
        assert_eq!(report.included, vec![PersonId::new("p")]);
        assert!(report.excluded.is_empty());
    }
}
