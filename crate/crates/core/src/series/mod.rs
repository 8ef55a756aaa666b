//! Death-aligned mention time series.
//!
//! A person's series holds, for each day offset `t` in `[-360, 400]` relative
//! to the death day (`t = 0`), the base-10 logarithm of the fraction of
//! documents mentioning the person that day, offset by the medium's epsilon so
//! zero days stay finite. Smoothing treats the pre- and post-mortem halves
//! separately so the death-day spike never bleeds into the pre-mortem level.

mod smoother;

pub use smoother::{supersmooth_segment, SmoothOutcome, SmootherConfig};

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusWindow, DailyMentionCounts, Medium, PersonId};

/// First day offset of the series domain.
pub const DAY_MIN: i32 = -360;
/// Last day offset of the series domain.
pub const DAY_MAX: i32 = 400;
/// Number of days in the fixed domain.
pub const SERIES_LEN: usize = (DAY_MAX - DAY_MIN + 1) as usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Raw,
    Smoothed,
}

/// Day-indexed log10 mention-fraction series for one person in one medium.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MentionSeries {
    pub person_id: PersonId,
    pub medium: Medium,
    pub kind: SeriesKind,
    pub epsilon: f64,
    /// Values for t = DAY_MIN..=DAY_MAX, in order.
    pub values: Vec<f64>,
    /// Day offsets whose values were filled rather than observed.
    pub interpolated: BTreeSet<i32>,
    /// Set when a smoother segment was too short and was copied unchanged.
    pub passthrough_warning: bool,
}

impl MentionSeries {
    pub fn value(&self, t: i32) -> f64 {
        debug_assert!((DAY_MIN..=DAY_MAX).contains(&t));
        self.values[(t - DAY_MIN) as usize]
    }

    pub fn set_value(&mut self, t: i32, v: f64) {
        self.values[(t - DAY_MIN) as usize] = v;
    }

    pub fn days() -> impl Iterator<Item = i32> {
        DAY_MIN..=DAY_MAX
    }

    /// Values over the inclusive offset range `[from, to]`.
    pub fn slice(&self, from: i32, to: i32) -> &[f64] {
        assert!(DAY_MIN <= from && from <= to && to <= DAY_MAX);
        &self.values[(from - DAY_MIN) as usize..=(to - DAY_MIN) as usize]
    }
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("no non-zero mention fraction in {0}; medium unusable")]
    AllZero(Medium),
    #[error("person {0} has no death date")]
    MissingDeathDate(PersonId),
    #[error("no observed day in the study window for {person} in {medium}")]
    NoObservedDays { person: PersonId, medium: Medium },
}

/// Global minimum non-zero mention fraction of one medium, over the study
/// windows of all given persons. One epsilon per medium.
pub fn compute_epsilon(
    persons: &[(PersonId, NaiveDate)],
    counts: &DailyMentionCounts,
    medium: Medium,
    window: &CorpusWindow,
) -> Result<f64, SeriesError> {
    let mut min: Option<f64> = None;
    for (person, death) in persons {
        for t in DAY_MIN..=DAY_MAX {
            let day = *death + Duration::days(t as i64);
            if !window.contains(day) {
                continue;
            }
            let total = counts.total_docs(medium, day);
            if total == 0 {
                continue;
            }
            let mentioned = counts.mention_docs(person, medium, day);
            if mentioned > 0 {
                let fraction = mentioned as f64 / total as f64;
                min = Some(match min {
                    Some(current) => current.min(fraction),
                    None => fraction,
                });
            }
        }
    }
    min.ok_or(SeriesError::AllZero(medium))
}

/// Build the raw log-fraction series for one person and medium.
///
/// Days with no documents are treated as missing: interior gaps are linearly
/// interpolated on the log scale, leading/trailing gaps are filled with the
/// nearest observed value; both are recorded in `interpolated`.
pub fn build_raw_series(
    person_id: &PersonId,
    death_date: NaiveDate,
    medium: Medium,
    counts: &DailyMentionCounts,
    epsilon: f64,
    window: &CorpusWindow,
) -> Result<MentionSeries, SeriesError> {
    let mut observed: Vec<Option<f64>> = Vec::with_capacity(SERIES_LEN);
    for t in DAY_MIN..=DAY_MAX {
        let day = death_date + Duration::days(t as i64);
        let total = if window.contains(day) {
            counts.total_docs(medium, day)
        } else {
            0
        };
        if total == 0 {
            observed.push(None);
        } else {
            let fraction = counts.mention_docs(person_id, medium, day) as f64 / total as f64;
            observed.push(Some((fraction + epsilon).log10()));
        }
    }

    if observed.iter().all(Option::is_none) {
        return Err(SeriesError::NoObservedDays {
            person: person_id.clone(),
            medium,
        });
    }

    let mut values = vec![0.0; SERIES_LEN];
    let mut interpolated = BTreeSet::new();
    let mut idx = 0;
    while idx < SERIES_LEN {
        if let Some(v) = observed[idx] {
            values[idx] = v;
            idx += 1;
            continue;
        }
        let gap_start = idx;
        while idx < SERIES_LEN && observed[idx].is_none() {
            idx += 1;
        }
        let left = gap_start.checked_sub(1).and_then(|i| observed[i]);
        let right = if idx < SERIES_LEN { observed[idx] } else { None };
        for j in gap_start..idx {
            let t = DAY_MIN + j as i32;
            interpolated.insert(t);
            values[j] = match (left, right) {
                (Some(l), Some(r)) => {
                    let span = (idx - gap_start + 1) as f64;
                    let frac = (j - gap_start + 1) as f64 / span;
                    l + (r - l) * frac
                }
                (Some(l), None) => l,
                (None, Some(r)) => r,
                (None, None) => unreachable!("at least one day is observed"),
            };
        }
    }

    Ok(MentionSeries {
        person_id: person_id.clone(),
        medium,
        kind: SeriesKind::Raw,
        epsilon,
        values,
        interpolated,
        passthrough_warning: false,
    })
}

/// Smooth a raw series with the default smoother configuration.
pub fn supersmooth(series: &MentionSeries) -> MentionSeries {
    supersmooth_with(series, &SmootherConfig::default())
}

/// Smooth a raw series, treating the pre-mortem (`t < 0`) and post-mortem
/// (`t >= 0`) halves independently.
pub fn supersmooth_with(series: &MentionSeries, cfg: &SmootherConfig) -> MentionSeries {
    let split = (-DAY_MIN) as usize;
    let pre = supersmooth_segment(&series.values[..split], cfg);
    let post = supersmooth_segment(&series.values[split..], cfg);

    let mut values = pre.values;
    values.extend(post.values);

    MentionSeries {
        person_id: series.person_id.clone(),
        medium: series.medium,
        kind: SeriesKind::Smoothed,
        epsilon: series.epsilon,
        values,
        interpolated: series.interpolated.clone(),
        passthrough_warning: pre.passthrough || post.passthrough,
    }
}
