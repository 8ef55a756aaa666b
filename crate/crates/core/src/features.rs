//! The four characteristic numbers of a mention time series.
//!
//! Day 0 belongs to the post-mortem side everywhere. Three features read the
//! smoothed series; the short-term boost takes its maximum from the raw
//! series so the death-day spike is not averaged away.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Medium, PersonId};
use crate::series::{MentionSeries, SeriesKind, DAY_MAX, DAY_MIN};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("window [{0}, {1}] outside the series domain [{DAY_MIN}, {DAY_MAX}]")]
    MissingDomain(i32, i32),
    #[error("feature extraction expects a raw and a smoothed series of the same person and medium")]
    MismatchedPair,
}

/// Inclusive day windows for the feature definitions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FeatureWindows {
    /// Pre-mortem mean window.
    pub pre: (i32, i32),
    /// Short-term maximum window.
    pub short: (i32, i32),
    /// Long-term mean window.
    pub long: (i32, i32),
    /// Post-mortem area window for the halving time.
    pub halving: (i32, i32),
}

impl Default for FeatureWindows {
    fn default() -> Self {
        FeatureWindows {
            pre: (-360, -30),
            short: (0, 29),
            long: (30, 360),
            halving: (0, 360),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFeatures {
    pub person_id: PersonId,
    pub medium: Medium,
    /// Mean of smoothed values over the pre window (log10 units).
    pub pre_mean: f64,
    /// Raw maximum over the short window minus the pre-mortem mean.
    pub short_boost: f64,
    /// Smoothed mean over the long window minus the pre-mortem mean.
    pub long_boost: f64,
    /// Days to accumulate half the area above the post-mortem minimum.
    pub halving_time: u32,
}

impl CurveFeatures {
    pub fn as_row(&self) -> [f64; 4] {
        [
            self.pre_mean,
            self.short_boost,
            self.long_boost,
            self.halving_time as f64,
        ]
    }
}

fn check_window(from: i32, to: i32) -> Result<(), FeatureError> {
    if from < DAY_MIN || to > DAY_MAX || from > to {
        return Err(FeatureError::MissingDomain(from, to));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Arithmetic mean of the smoothed series over the pre-mortem window.
pub fn pre_mortem_mean(smoothed: &MentionSeries, w: &FeatureWindows) -> Result<f64, FeatureError> {
    check_window(w.pre.0, w.pre.1)?;
    Ok(mean(smoothed.slice(w.pre.0, w.pre.1)))
}

/// Raw maximum over the short window minus the pre-mortem mean.
pub fn short_term_boost(
    raw: &MentionSeries,
    pre_mean: f64,
    w: &FeatureWindows,
) -> Result<f64, FeatureError> {
    check_window(w.short.0, w.short.1)?;
    let max = raw
        .slice(w.short.0, w.short.1)
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(max - pre_mean)
}

/// Smoothed mean over the long window minus the pre-mortem mean.
pub fn long_term_boost(
    smoothed: &MentionSeries,
    pre_mean: f64,
    w: &FeatureWindows,
) -> Result<f64, FeatureError> {
    check_window(w.long.0, w.long.1)?;
    Ok(mean(smoothed.slice(w.long.0, w.long.1)) - pre_mean)
}

/// Smallest `T` by which the running area between the smoothed post-mortem
/// curve and its minimum reaches half the total (left Riemann sum over
/// daily values). A flat segment has no area and returns 0.
pub fn halving_time(smoothed: &MentionSeries, w: &FeatureWindows) -> Result<u32, FeatureError> {
    check_window(w.halving.0, w.halving.1)?;
    let segment = smoothed.slice(w.halving.0, w.halving.1);
    let min = segment.iter().cloned().fold(f64::INFINITY, f64::min);
    let total: f64 = segment.iter().map(|v| v - min).sum();
    if total <= 0.0 {
        return Ok(0);
    }
    let half = total / 2.0;
    let mut acc = 0.0;
    for (i, v) in segment.iter().enumerate() {
        acc += v - min;
        if acc >= half {
            return Ok(i as u32);
        }
    }
    Ok((segment.len() - 1) as u32)
}

/// Extract all four features from a (raw, smoothed) series pair.
pub fn extract(
    raw: &MentionSeries,
    smoothed: &MentionSeries,
    w: &FeatureWindows,
) -> Result<CurveFeatures, FeatureError> {
    if raw.kind != SeriesKind::Raw
        || smoothed.kind != SeriesKind::Smoothed
        || raw.person_id != smoothed.person_id
        || raw.medium != smoothed.medium
    {
        return Err(FeatureError::MismatchedPair);
    }
    let pre_mean = pre_mortem_mean(smoothed, w)?;
    Ok(CurveFeatures {
        person_id: raw.person_id.clone(),
        medium: raw.medium,
        pre_mean,
        short_boost: short_term_boost(raw, pre_mean, w)?,
        long_boost: long_term_boost(smoothed, pre_mean, w)?,
        halving_time: halving_time(smoothed, w)?,
    })
}

/// Linear-scale post-to-pre ratio implied by a log10 boost, e.g. a boost of
/// 1.98 is a ratio of about 95.
pub fn boost_ratio(boost: f64) -> f64 {
    10f64.powf(boost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn series(kind: SeriesKind, f: impl Fn(i32) -> f64) -> MentionSeries {
        MentionSeries {
            person_id: PersonId::new("p"),
            medium: Medium::News,
            kind,
            epsilon: 1e-9,
            values: (DAY_MIN..=DAY_MAX).map(f).collect(),
            interpolated: BTreeSet::new(),
            passthrough_warning: false,
        }
    }

    fn windows() -> FeatureWindows {
        FeatureWindows::default()
    }

    #[test]
    fn pre_mean_of_constant_series() {
        let s = series(SeriesKind::Smoothed, |_| -5.0);
        assert_eq!(pre_mortem_mean(&s, &windows()).unwrap(), -5.0);
    }

    #[test]
    fn pre_mean_of_two_level_series() {
        // -6 on [-360, -196] (165 days), -4 on [-195, -30] (166 days).
        let s = series(SeriesKind::Smoothed, |t| if t <= -196 { -6.0 } else { -4.0 });
        let expected = (165.0 * -6.0 + 166.0 * -4.0) / 331.0;
        let got = pre_mortem_mean(&s, &windows()).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - (-4.997)).abs() < 1e-3);
    }

    #[test]
    fn final_month_before_death_is_excluded() {
        let base = series(SeriesKind::Smoothed, |_| -5.0);
        let spiked = series(SeriesKind::Smoothed, |t| {
            if (-29..=-1).contains(&t) {
                37.0
            } else {
                -5.0
            }
        });
        assert_eq!(
            pre_mortem_mean(&base, &windows()).unwrap(),
            pre_mortem_mean(&spiked, &windows()).unwrap()
        );
    }

    #[test]
    fn short_boost_is_raw_max_minus_pre_mean() {
        let raw = series(SeriesKind::Raw, |t| if t == 3 { -3.0 } else { -6.5 });
        let boost = short_term_boost(&raw, -5.0, &windows()).unwrap();
        assert!((boost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boost_ratios_match_reported_percentages() {
        // 1.98 log units is about a 9,400% increase, 2.45 about 28,000%.
        assert!((boost_ratio(1.98) - 95.0).abs() <= 1.0);
        assert!((boost_ratio(2.45) - 281.0).abs() <= 1.0);
        assert!((boost_ratio(0.016) - 1.038).abs() <= 0.001);
    }

    #[test]
    fn long_boost_zero_when_post_matches_pre_level() {
        let s = series(SeriesKind::Smoothed, |_| -5.4);
        let pre = pre_mortem_mean(&s, &windows()).unwrap();
        assert_eq!(long_term_boost(&s, pre, &windows()).unwrap(), 0.0);
    }

    #[test]
    fn boosts_invariant_under_global_doubling() {
        // Doubling all fractions adds log10(2) to every log value; the
        // difference-based boosts cannot move (epsilon-free limit).
        let raw = series(SeriesKind::Raw, |t| -6.0 + 0.01 * (t % 7) as f64);
        let smoothed = series(SeriesKind::Smoothed, |t| -6.0 + 0.01 * (t % 7) as f64);
        let f = extract(&raw, &smoothed, &windows()).unwrap();

        let shift = 2f64.log10();
        let mut raw2 = raw.clone();
        let mut smoothed2 = smoothed.clone();
        raw2.values.iter_mut().for_each(|v| *v += shift);
        smoothed2.values.iter_mut().for_each(|v| *v += shift);
        let g = extract(&raw2, &smoothed2, &windows()).unwrap();

        assert!((f.short_boost - g.short_boost).abs() < 1e-12);
        assert!((f.long_boost - g.long_boost).abs() < 1e-12);
        assert_eq!(f.halving_time, g.halving_time);
        assert!((g.pre_mean - f.pre_mean - shift).abs() < 1e-12);
    }

    #[test]
    fn halving_time_all_mass_on_day_zero() {
        let s = series(SeriesKind::Smoothed, |t| if t == 0 { 4.0 } else { 0.0 });
        assert_eq!(halving_time(&s, &windows()).unwrap(), 0);
    }

    #[test]
    fn halving_time_four_unit_days() {
        // Values 1 on days 0..=3, 0 afterwards: area 4, half reached at T=1.
        let s = series(SeriesKind::Smoothed, |t| {
            if (0..=3).contains(&t) {
                1.0
            } else {
                0.0
            }
        });
        assert_eq!(halving_time(&s, &windows()).unwrap(), 1);
    }

    #[test]
    fn halving_time_flat_segment_is_zero() {
        let s = series(SeriesKind::Smoothed, |_| -5.0);
        assert_eq!(halving_time(&s, &windows()).unwrap(), 0);
    }

    #[test]
    fn halving_time_moves_later_when_mass_moves_later() {
        let early = series(SeriesKind::Smoothed, |t| {
            if (0..=10).contains(&t) {
                1.0
            } else {
                0.0
            }
        });
        let late = series(SeriesKind::Smoothed, |t| {
            if (100..=110).contains(&t) {
                1.0
            } else {
                0.0
            }
        });
        assert!(
            halving_time(&early, &windows()).unwrap() < halving_time(&late, &windows()).unwrap()
        );
    }

    #[test]
    fn extraction_rejects_mismatched_pairs() {
        let raw = series(SeriesKind::Raw, |_| -5.0);
        let also_raw = series(SeriesKind::Raw, |_| -5.0);
        assert!(matches!(
            extract(&raw, &also_raw, &windows()),
            Err(FeatureError::MismatchedPair)
        ));
    }

    #[test]
    fn extraction_is_deterministic() {
        let raw = series(SeriesKind::Raw, |t| -6.0 + (t as f64 / 100.0).sin());
        let smoothed = series(SeriesKind::Smoothed, |t| -6.0 + (t as f64 / 100.0).sin());
        let a = extract(&raw, &smoothed, &windows()).unwrap();
        let b = extract(&raw, &smoothed, &windows()).unwrap();
        assert_eq!(a.pre_mean.to_bits(), b.pre_mean.to_bits());
        assert_eq!(a.short_boost.to_bits(), b.short_boost.to_bits());
        assert_eq!(a.long_boost.to_bits(), b.long_boost.to_bits());
        assert_eq!(a.halving_time, b.halving_time);
    }
}
