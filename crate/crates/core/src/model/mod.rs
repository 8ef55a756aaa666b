//! Decay models for the mean post-mortem mention curve.
//!
//! The central model splits total attention `S(t)` into a quickly fading
//! communicative component `a * t^-b` and a constant cultural baseline `c`;
//! a catalog of alternative decay shapes from the forgetting-curve literature
//! is fitted alongside it for comparison.

mod catalog;
mod fit;

pub use catalog::{eval_model, ModelId};
pub use fit::{
    compare_models, fit_model, fit_model_range, MemoryModelFit, ModelRanking, StartOutcome,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Medium;
use crate::series::{MentionSeries, DAY_MIN};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{model} expects {expected} parameters, got {got}")]
    ParamCount {
        model: ModelId,
        expected: usize,
        got: usize,
    },
    #[error("{model} is undefined at t = {t}")]
    Domain { model: ModelId, t: f64 },
    #[error("mean curve requires at least one series")]
    EmptyCollection,
    #[error("series mix media; mean curve is per medium")]
    MixedMedia,
    #[error("curve does not cover t in [{0}, {1}]")]
    MissingRange(i32, i32),
    #[error("quantile must lie strictly between 0 and 1, got {0}")]
    InvalidQuantile(f64),
    #[error("model catalog needs at least 2 entries, got {0}")]
    CatalogTooSmall(usize),
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid fit range [{0}, {1}]")]
    InvalidRange(u32, u32),
    #[error(transparent)]
    Curve(ModelError),
    #[error("no feasible start point for {0}")]
    NoFeasibleStart(ModelId),
    #[error("no start converged for {}; best sse_log = {}", .0.model, .0.sse_log)]
    NotConverged(Box<MemoryModelFit>),
}

/// Parameters of the shifted power law `a * t^-b + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedPowerLawParams {
    /// Amplitude of the fading component, in fraction units.
    pub amplitude: f64,
    /// Decay exponent (dimensionless).
    pub exponent: f64,
    /// Persistent baseline, in fraction units.
    pub baseline: f64,
}

impl ShiftedPowerLawParams {
    pub fn new(amplitude: f64, exponent: f64, baseline: f64) -> Self {
        debug_assert!(amplitude > 0.0 && exponent > 0.0 && baseline > 0.0);
        ShiftedPowerLawParams {
            amplitude,
            exponent,
            baseline,
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.amplitude, self.exponent, self.baseline]
    }

    pub fn from_slice(p: &[f64]) -> Self {
        ShiftedPowerLawParams {
            amplitude: p[0],
            exponent: p[1],
            baseline: p[2],
        }
    }

    /// Fading component at day `t >= 1`.
    pub fn communicative(&self, t: f64) -> f64 {
        self.amplitude * t.powf(-self.exponent)
    }

    /// Persistent component (constant over the study horizon).
    pub fn cultural(&self) -> f64 {
        self.baseline
    }
}

/// Reference fits of the shifted power law for the two media, on the mean
/// curve over days 1..=400.
pub const NEWS_PARAMS: ShiftedPowerLawParams = ShiftedPowerLawParams {
    amplitude: 5.58e-5,
    exponent: 1.34,
    baseline: 1.75e-6,
};

/// See [`NEWS_PARAMS`].
pub const TWITTER_PARAMS: ShiftedPowerLawParams = ShiftedPowerLawParams {
    amplitude: 1.90e-6,
    exponent: 1.54,
    baseline: 2.35e-8,
};

/// Day-indexed mean of log10 mention fractions over persons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanCurve {
    pub medium: Medium,
    /// Day offset of `values[0]`.
    pub t_min: i32,
    pub values: Vec<f64>,
}

impl MeanCurve {
    pub fn t_max(&self) -> i32 {
        self.t_min + self.values.len() as i32 - 1
    }

    pub fn value(&self, t: i32) -> f64 {
        self.values[(t - self.t_min) as usize]
    }

    /// Values over the inclusive offset range `[from, to]`.
    pub fn window(&self, from: i32, to: i32) -> Result<&[f64], ModelError> {
        if from < self.t_min || to > self.t_max() || from > to {
            return Err(ModelError::MissingRange(from, to));
        }
        Ok(&self.values[(from - self.t_min) as usize..=(to - self.t_min) as usize])
    }
}

/// Pointwise arithmetic mean of the series' log values.
pub fn mean_log_series(series: &[MentionSeries]) -> Result<MeanCurve, ModelError> {
    let first = series.first().ok_or(ModelError::EmptyCollection)?;
    if series.iter().any(|s| s.medium != first.medium) {
        return Err(ModelError::MixedMedia);
    }
    let len = first.values.len();
    let mut values = vec![0.0; len];
    for s in series {
        for (acc, v) in values.iter_mut().zip(&s.values) {
            *acc += v;
        }
    }
    let n = series.len() as f64;
    for v in values.iter_mut() {
        *v /= n;
    }
    Ok(MeanCurve {
        medium: first.medium,
        t_min: DAY_MIN,
        values,
    })
}

/// The two components at day `t` and the fading component's share of the sum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Decomposition {
    pub communicative: f64,
    pub cultural: f64,
    pub communicative_share: f64,
}

pub fn decompose(params: &ShiftedPowerLawParams, t: f64) -> Decomposition {
    let u = params.communicative(t);
    let v = params.cultural();
    Decomposition {
        communicative: u,
        cultural: v,
        communicative_share: u / (u + v),
    }
}

/// First integer day (>= 1) on which the fading component drops strictly
/// below the baseline.
pub fn crossover_time(params: &ShiftedPowerLawParams) -> u32 {
    let a = params.amplitude;
    let c = params.baseline;
    if a < c {
        return 1;
    }
    let root = (a / c).powf(1.0 / params.exponent);
    let mut t = root.ceil().max(1.0) as u32;
    while params.communicative(t as f64) >= c && t < u32::MAX {
        t += 1;
    }
    while t > 1 && params.communicative((t - 1) as f64) < c {
        t -= 1;
    }
    t
}

/// First integer day (>= 1) on which the fading component's share of total
/// attention is at most `q`.
pub fn quantile_time(params: &ShiftedPowerLawParams, q: f64) -> Result<u32, ModelError> {
    if !(q > 0.0 && q < 1.0) {
        return Err(ModelError::InvalidQuantile(q));
    }
    let a = params.amplitude;
    let threshold = params.baseline * q / (1.0 - q);
    if a <= threshold {
        return Ok(1);
    }
    let share = |t: f64| decompose(params, t).communicative_share;
    let root = (a / threshold).powf(1.0 / params.exponent);
    let mut t = root.ceil().max(1.0) as u32;
    while share(t as f64) > q && t < u32::MAX {
        t += 1;
    }
    while t > 1 && share((t - 1) as f64) <= q {
        t -= 1;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::generate_series;

    fn noiseless_curve(params: &ShiftedPowerLawParams) -> MeanCurve {
        let series = generate_series(params, Medium::News, 0.0, 1);
        mean_log_series(&[series]).unwrap()
    }

    #[test]
    fn mean_of_two_series_is_pointwise_mean() {
        let mut a = generate_series(&NEWS_PARAMS, Medium::News, 0.0, 1);
        let mut b = a.clone();
        a.values.iter_mut().for_each(|v| *v = -4.0);
        b.values.iter_mut().for_each(|v| *v = -6.0);
        let mean = mean_log_series(&[a, b]).unwrap();
        assert!(mean.values.iter().all(|&v| (v + 5.0).abs() < 1e-12));
    }

    #[test]
    fn mean_of_single_series_is_itself() {
        let s = generate_series(&NEWS_PARAMS, Medium::News, 0.05, 3);
        let mean = mean_log_series(&[s.clone()]).unwrap();
        for (m, v) in mean.values.iter().zip(&s.values) {
            assert_eq!(m.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn mean_of_identical_series_is_any_one_of_them() {
        let s = generate_series(&TWITTER_PARAMS, Medium::Twitter, 0.02, 9);
        let mean = mean_log_series(&[s.clone(), s.clone(), s.clone()]).unwrap();
        for (m, v) in mean.values.iter().zip(&s.values) {
            assert!((m - v).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_collection_is_an_error() {
        assert!(matches!(
            mean_log_series(&[]),
            Err(ModelError::EmptyCollection)
        ));
    }

    #[test]
    fn mixed_media_are_rejected() {
        let a = generate_series(&NEWS_PARAMS, Medium::News, 0.0, 1);
        let b = generate_series(&TWITTER_PARAMS, Medium::Twitter, 0.0, 1);
        assert!(matches!(
            mean_log_series(&[a, b]),
            Err(ModelError::MixedMedia)
        ));
    }

    #[test]
    fn round_trip_recovers_news_parameters() {
        let curve = noiseless_curve(&NEWS_PARAMS);
        let fit = fit_model(ModelId::ShiftedPowerLaw, &curve).unwrap();
        let truth = NEWS_PARAMS.to_vec();
        for (got, want) in fit.params.iter().zip(&truth) {
            assert!(
                ((got - want) / want).abs() < 1e-4,
                "got {got}, want {want}"
            );
        }
        assert!(fit.r2_log >= 1.0 - 1e-10);
        assert!(fit.converged);
    }

    #[test]
    fn round_trip_recovers_twitter_parameters() {
        let curve = {
            let series = generate_series(&TWITTER_PARAMS, Medium::Twitter, 0.0, 1);
            mean_log_series(&[series]).unwrap()
        };
        let fit = fit_model(ModelId::ShiftedPowerLaw, &curve).unwrap();
        let truth = TWITTER_PARAMS.to_vec();
        for (got, want) in fit.params.iter().zip(&truth) {
            assert!(((got - want) / want).abs() < 1e-4);
        }
        assert!(fit.r2_log >= 1.0 - 1e-10);
    }

    #[test]
    fn constant_curve_collapses_to_the_baseline() {
        let mut series = generate_series(&NEWS_PARAMS, Medium::News, 0.0, 1);
        series.values.iter_mut().for_each(|v| *v = -5.5);
        let curve = mean_log_series(&[series]).unwrap();
        let fit = fit_model(ModelId::ShiftedPowerLaw, &curve).unwrap();
        let params = ShiftedPowerLawParams::from_slice(&fit.params);
        assert!(
            (params.baseline - 10f64.powf(-5.5)).abs() / 10f64.powf(-5.5) < 1e-3,
            "baseline {} should sit at the curve level",
            params.baseline
        );
        assert!(decompose(&params, 1.0).communicative_share < 1e-3);
    }

    #[test]
    fn reported_sse_never_exceeds_any_start() {
        for params in [NEWS_PARAMS, TWITTER_PARAMS] {
            let mut series = generate_series(&params, Medium::News, 0.0, 1);
            // A mild distortion so the objective is not exactly zero.
            for (i, v) in series.values.iter_mut().enumerate() {
                *v += 0.03 * ((i % 17) as f64 / 17.0 - 0.5);
            }
            let curve = mean_log_series(&[series]).unwrap();
            let fit = fit_model(ModelId::ShiftedPowerLaw, &curve).unwrap();
            for start in &fit.starts {
                assert!(fit.sse_log <= start.initial_sse + 1e-12);
                assert!(start.final_sse <= start.initial_sse + 1e-12);
            }
        }
    }

    #[test]
    fn scale_equivariance_of_the_fit() {
        let kappa: f64 = 3.7;
        let curve = noiseless_curve(&NEWS_PARAMS);
        let scaled = MeanCurve {
            medium: curve.medium,
            t_min: curve.t_min,
            values: curve.values.iter().map(|v| v + kappa.log10()).collect(),
        };
        let base = fit_model(ModelId::ShiftedPowerLaw, &curve).unwrap();
        let fit = fit_model(ModelId::ShiftedPowerLaw, &scaled).unwrap();
        assert!((fit.params[0] / (kappa * base.params[0]) - 1.0).abs() < 1e-4);
        assert!((fit.params[1] / base.params[1] - 1.0).abs() < 1e-4);
        assert!((fit.params[2] / (kappa * base.params[2]) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn forgetting_rate_identity_holds() {
        // d/dt of the fading component equals -(b/t) times it.
        let p = NEWS_PARAMS;
        for t in [2.0, 10.0, 100.0] {
            let h = 1e-4 * t;
            let du = (p.communicative(t + h) - p.communicative(t - h)) / (2.0 * h);
            let expected = -(p.exponent / t) * p.communicative(t);
            assert!(
                ((du - expected) / expected).abs() < 1e-3,
                "t={t}: {du} vs {expected}"
            );
        }
    }

    #[test]
    fn noisy_population_mean_still_fits_tightly() {
        // Per-person log noise of 0.05 averaged over 100 persons leaves the
        // mean curve essentially clean.
        let series: Vec<_> = (0..100)
            .map(|i| generate_series(&NEWS_PARAMS, Medium::News, 0.05, 1000 + i))
            .collect();
        let curve = mean_log_series(&series).unwrap();
        let fit = fit_model(ModelId::ShiftedPowerLaw, &curve).unwrap();
        assert!(fit.r2_log >= 0.99, "r2_log = {}", fit.r2_log);
    }

    #[test]
    fn share_at_crossover_is_one_half_and_decreasing() {
        let p = NEWS_PARAMS;
        let root = (p.amplitude / p.baseline).powf(1.0 / p.exponent);
        let d = decompose(&p, root);
        assert!((d.communicative_share - 0.5).abs() < 1e-12);
        let mut prev = decompose(&p, 1.0).communicative_share;
        for t in 2..=400 {
            let share = decompose(&p, t as f64).communicative_share;
            assert!(share < prev);
            prev = share;
        }
    }

    #[test]
    fn crossover_days_for_the_reference_fits() {
        assert_eq!(crossover_time(&NEWS_PARAMS), 14);
        assert_eq!(crossover_time(&TWITTER_PARAMS), 18);
    }

    #[test]
    fn crossover_edge_cases() {
        // Fading component below baseline from the very start.
        let weak = ShiftedPowerLawParams::new(1e-7, 1.0, 1e-6);
        assert_eq!(crossover_time(&weak), 1);
        // Exactly equal at t = 1: the first strict drop is day 2.
        let tied = ShiftedPowerLawParams::new(1e-6, 1.0, 1e-6);
        assert_eq!(crossover_time(&tied), 2);
    }

    #[test]
    fn quarter_share_days_for_the_reference_fits() {
        assert_eq!(quantile_time(&NEWS_PARAMS, 0.25).unwrap(), 31);
        assert_eq!(quantile_time(&TWITTER_PARAMS, 0.25).unwrap(), 36);
        // Bracketing check quoted from the share itself.
        assert!(decompose(&NEWS_PARAMS, 31.0).communicative_share <= 0.25);
        assert!(decompose(&NEWS_PARAMS, 30.0).communicative_share > 0.25);
    }

    #[test]
    fn median_quantile_equals_crossover() {
        for p in [NEWS_PARAMS, TWITTER_PARAMS] {
            assert_eq!(quantile_time(&p, 0.5).unwrap(), crossover_time(&p));
        }
    }

    #[test]
    fn invalid_quantile_is_rejected() {
        assert!(quantile_time(&NEWS_PARAMS, 0.0).is_err());
        assert!(quantile_time(&NEWS_PARAMS, 1.0).is_err());
    }

    #[test]
    fn shifted_power_law_ranks_first_on_its_own_data() {
        let curve = noiseless_curve(&NEWS_PARAMS);
        let ranking = compare_models(ModelId::catalog(), &curve).unwrap();
        assert_eq!(ranking.ranked[0].model, ModelId::ShiftedPowerLaw);
        assert!(ranking.ranked[0].r2_log >= 1.0 - 1e-9);
    }

    #[test]
    fn biexponential_attains_perfect_fit_on_its_own_data() {
        let mut series = generate_series(&NEWS_PARAMS, Medium::News, 0.0, 1);
        let p = [1.2e-4, 0.08, 3.0e-6, 0.003];
        for t in 1..=crate::series::DAY_MAX {
            let f = eval_model(ModelId::Biexponential, &p, t as f64).unwrap();
            series.set_value(t, f.log10());
        }
        let curve = mean_log_series(&[series]).unwrap();
        let fit = fit_model(ModelId::Biexponential, &curve).unwrap();
        assert!(fit.r2_log >= 1.0 - 1e-9, "r2_log = {}", fit.r2_log);
    }

    #[test]
    fn duplicate_catalog_entries_keep_catalog_order() {
        let curve = noiseless_curve(&NEWS_PARAMS);
        let catalog = [ModelId::Exponential, ModelId::Exponential];
        let ranking = compare_models(&catalog, &curve).unwrap();
        assert_eq!(ranking.ranked.len(), 2);
        assert_eq!(ranking.ranked[0].sse_log, ranking.ranked[1].sse_log);
    }

    #[test]
    fn tiny_catalog_is_rejected() {
        let curve = noiseless_curve(&NEWS_PARAMS);
        assert!(matches!(
            compare_models(&[ModelId::PowerLaw], &curve),
            Err(ModelError::CatalogTooSmall(1))
        ));
    }
}
