//! Nonlinear least-squares fitting of decay models on the log10 scale.
//!
//! The objective is the sum of squared differences between the mean log
//! mention curve and `log10(model(t))` over the fit range. Positive-only
//! parameters are optimized as logs; steps come from a damped Gauss-Newton
//! (Levenberg-Marquardt) iteration with multi-starts spread over a coarse
//! grid of decay exponents and two intercept guesses per grid point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::catalog::{eval_unchecked, grad_unchecked, ModelId};
use super::{FitError, MeanCurve, ModelError};

const LN10: f64 = std::f64::consts::LN_10;
/// Convergence: relative SSE change below this, per accepted step.
const REL_SSE_TOL: f64 = 1e-10;
/// An SSE this small is converged regardless of relative progress.
const ABS_SSE_TOL: f64 = 1e-22;
const MAX_ITERS: u32 = 500;

/// Outcome of one multi-start run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartOutcome {
    pub initial_params: Vec<f64>,
    pub initial_sse: f64,
    pub final_sse: f64,
    pub converged: bool,
    pub iterations: u32,
}

/// A fitted model with its goodness of fit on the log10 scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryModelFit {
    #[serde(rename = "model_id")]
    pub model: ModelId,
    /// Natural-scale parameters, in the model's declared order.
    pub params: Vec<f64>,
    pub sse_log: f64,
    pub r2_log: f64,
    pub t_range: (u32, u32),
    pub converged: bool,
    pub starts: Vec<StartOutcome>,
    pub winner_start: usize,
}

struct Problem<'a> {
    model: ModelId,
    ts: &'a [f64],
    ys: &'a [f64],
    positive: &'static [bool],
}

impl Problem<'_> {
    fn to_theta(&self, natural: &[f64]) -> Vec<f64> {
        natural
            .iter()
            .zip(self.positive)
            .map(|(&p, &pos)| if pos { p.ln() } else { p })
            .collect()
    }

    fn to_natural(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.positive)
            .map(|(&t, &pos)| if pos { t.exp() } else { t })
            .collect()
    }

    /// Residuals `y - log10 f` and their SSE, or `None` when the parameter
    /// vector leaves the model's positive domain somewhere in the range.
    fn residuals(&self, params: &[f64]) -> Option<(Vec<f64>, f64)> {
        let mut res = Vec::with_capacity(self.ts.len());
        let mut sse = 0.0;
        for (&t, &y) in self.ts.iter().zip(self.ys) {
            let f = eval_unchecked(self.model, params, t);
            // NaN fails the finiteness test, so it is rejected here too.
            if !f.is_finite() || f <= 0.0 {
                return None;
            }
            let r = y - f.log10();
            if !r.is_finite() {
                return None;
            }
            sse += r * r;
            res.push(r);
        }
        Some((res, sse))
    }

    /// Jacobian of the residual vector with respect to theta.
    fn jacobian(&self, params: &[f64]) -> DMatrix<f64> {
        let n = self.ts.len();
        let p = params.len();
        let mut jac = DMatrix::zeros(n, p);
        let mut grad = vec![0.0; p];
        for (i, &t) in self.ts.iter().enumerate() {
            let f = eval_unchecked(self.model, params, t);
            grad_unchecked(self.model, params, t, &mut grad);
            for j in 0..p {
                let chain = if self.positive[j] { params[j] } else { 1.0 };
                jac[(i, j)] = -grad[j] * chain / (f * LN10);
            }
        }
        jac
    }
}

fn levenberg_marquardt(
    problem: &Problem<'_>,
    start_natural: &[f64],
) -> Option<(StartOutcome, Vec<f64>)> {
    let mut theta = problem.to_theta(start_natural);
    let (_, mut sse) = problem.residuals(start_natural)?;
    let initial_sse = sse;

    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    'outer: while iterations < MAX_ITERS {
        iterations += 1;
        let params = problem.to_natural(&theta);
        let (res, _) = problem.residuals(&params)?;
        let jac = problem.jacobian(&params);
        let r = DVector::from_vec(res);
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * r;

        loop {
            let mut damped = a.clone();
            for j in 0..damped.nrows() {
                damped[(j, j)] += lambda * damped[(j, j)].max(1e-12);
            }
            let delta = match damped.lu().solve(&(-&g)) {
                Some(d) => d,
                None => {
                    lambda *= 4.0;
                    if lambda > 1e12 {
                        break 'outer;
                    }
                    continue;
                }
            };
            let candidate: Vec<f64> = theta.iter().zip(delta.iter()).map(|(t, d)| t + d).collect();
            let accepted = problem
                .residuals(&problem.to_natural(&candidate))
                .filter(|(_, new_sse)| *new_sse < sse);
            match accepted {
                Some((_, new_sse)) => {
                    let rel = (sse - new_sse) / sse.max(1e-300);
                    theta = candidate;
                    sse = new_sse;
                    lambda = (lambda / 3.0).max(1e-12);
                    if rel < REL_SSE_TOL || sse < ABS_SSE_TOL {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                None => {
                    lambda *= 4.0;
                    if lambda > 1e12 {
                        // No downhill step exists at any damping: a fixed
                        // point of the iteration.
                        converged = true;
                        break 'outer;
                    }
                }
            }
        }
    }

    Some((
        StartOutcome {
            initial_params: start_natural.to_vec(),
            initial_sse,
            final_sse: sse,
            converged,
            iterations,
        },
        problem.to_natural(&theta),
    ))
}

struct CurveStats {
    t_first: f64,
    t_last: f64,
    head_fraction: f64,
    tail_fraction: f64,
    /// Slope of a line fitted to the log10 tail, per day.
    tail_slope: f64,
    tail_mid_t: f64,
    tail_mid_y: f64,
}

fn curve_stats(ts: &[f64], ys: &[f64]) -> CurveStats {
    let n = ts.len();
    let tail_len = (n / 4).max(2).min(n);
    let tail_t = &ts[n - tail_len..];
    let tail_y = &ys[n - tail_len..];
    let mean_t: f64 = tail_t.iter().sum::<f64>() / tail_len as f64;
    let mean_y: f64 = tail_y.iter().sum::<f64>() / tail_len as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&t, &y) in tail_t.iter().zip(tail_y) {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (y - mean_y);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    CurveStats {
        t_first: ts[0],
        t_last: ts[n - 1],
        head_fraction: 10f64.powf(ys[0]),
        tail_fraction: 10f64.powf(mean_y),
        tail_slope: slope,
        tail_mid_t: mean_t,
        tail_mid_y: mean_y,
    }
}

/// Multi-start grid: four decay-exponent scales by two intercept variants.
const EXPONENT_GRID: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

fn starts_for(model: ModelId, stats: &CurveStats) -> Vec<Vec<f64>> {
    let f1 = stats.head_fraction.max(1e-300);
    let ftail = stats.tail_fraction.max(1e-300);
    let span = stats.t_last - stats.t_first;
    let mut starts = Vec::with_capacity(8);
    for &gb in &EXPONENT_GRID {
        for variant in 0..2 {
            let intercept_scale = if variant == 0 { 1.0 } else { 0.3 };
            let start = match model {
                ModelId::ShiftedPowerLaw => {
                    let c = ftail * intercept_scale;
                    let a = (f1 - c).max(0.1 * f1);
                    vec![a, gb, c]
                }
                ModelId::PowerLaw => vec![f1 * if variant == 0 { 1.0 } else { 0.5 }, gb],
                ModelId::Exponential => {
                    // Map the grid to rates that decay over the fit range.
                    let rate = gb * 2.0 / span.max(1.0);
                    let a = f1 * (rate * stats.t_first).exp() * if variant == 0 { 1.0 } else { 3.0 };
                    vec![a, rate]
                }
                ModelId::ShiftedExponential => {
                    let c = ftail * intercept_scale;
                    let rate = gb * 8.0 / span.max(1.0);
                    let a = (f1 - c).max(0.1 * f1) * (rate * stats.t_first).exp();
                    vec![a, rate, c]
                }
                ModelId::Biexponential => biexp_start(stats, gb, intercept_scale),
                ModelId::Logarithmic => {
                    let a = f1 * if variant == 0 { 1.0 } else { 2.0 };
                    let raw_b = (f1 - ftail) / stats.t_last.max(2.0).ln() * gb;
                    // Keep the start feasible across the whole range.
                    let cap = (a - 0.1 * ftail) / stats.t_last.max(2.0).ln();
                    vec![a, raw_b.min(cap).max(0.0)]
                }
                ModelId::Hyperbolic => {
                    let a = (1.0 / f1) * if variant == 0 { 1.0 } else { 0.5 };
                    let b = (1.0 / ftail - 1.0 / f1).max(1e-12) / span.max(1.0) * gb;
                    vec![a, b.max(1e-12)]
                }
                ModelId::SqrtExponential => {
                    let rate = ((f1 / ftail).ln().max(1e-6))
                        / (stats.t_last.sqrt() - stats.t_first.sqrt()).max(1.0)
                        * gb;
                    let a = f1 * (rate * stats.t_first.sqrt()).exp()
                        * if variant == 0 { 1.0 } else { 0.5 };
                    vec![a, rate]
                }
                ModelId::ShiftedSqrtExponential => {
                    let c = ftail * intercept_scale;
                    let rate = (((f1 - c).max(0.1 * f1) / (0.5 * ftail)).ln().max(1e-6))
                        / (stats.t_last.sqrt() - stats.t_first.sqrt()).max(1.0)
                        * gb;
                    let a = (f1 - c).max(0.1 * f1) * (rate * stats.t_first.sqrt()).exp();
                    vec![a, rate, c]
                }
            };
            starts.push(start);
        }
    }
    starts
}

/// Peel-off start for the biexponential: read the slow component off the
/// tail line, subtract it, and read the fast component off the head.
fn biexp_start(stats: &CurveStats, gb: f64, intercept_scale: f64) -> Vec<f64> {
    let d_est = (-stats.tail_slope * LN10).max(1e-7) * gb;
    let log10_c = stats.tail_mid_y + d_est * stats.tail_mid_t / LN10;
    let c = 10f64.powf(log10_c.min(300.0)) * intercept_scale;
    let slow_at_head = c * (-d_est * stats.t_first).exp();
    let fast_head = (stats.head_fraction - slow_at_head).max(0.1 * stats.head_fraction);
    let span = (stats.t_last - stats.t_first).max(1.0);
    let b_est = (gb * 20.0 / span).max(d_est * 5.0);
    let a = fast_head * (b_est * stats.t_first).exp();
    vec![a, b_est, c, d_est]
}

/// Fit one model to the mean curve over `t_range` (inclusive, in days).
pub fn fit_model_range(
    model: ModelId,
    curve: &MeanCurve,
    t_range: (u32, u32),
) -> Result<MemoryModelFit, FitError> {
    let (t0, t1) = t_range;
    if t0 < 1 || t1 < t0 {
        return Err(FitError::InvalidRange(t0, t1));
    }
    let ys = curve
        .window(t0 as i32, t1 as i32)
        .map_err(FitError::Curve)?;
    let ts: Vec<f64> = (t0..=t1).map(f64::from).collect();

    let problem = Problem {
        model,
        ts: &ts,
        ys,
        positive: model.positive_params(),
    };
    let stats = curve_stats(&ts, ys);

    let mut starts = Vec::new();
    let mut best: Option<(usize, f64, Vec<f64>, bool)> = None;
    for (idx, start) in starts_for(model, &stats).into_iter().enumerate() {
        match levenberg_marquardt(&problem, &start) {
            Some((outcome, params)) => {
                let better = match &best {
                    Some((_, best_sse, _, _)) => outcome.final_sse < *best_sse,
                    None => true,
                };
                if better {
                    best = Some((idx, outcome.final_sse, params, outcome.converged));
                }
                starts.push(outcome);
            }
            None => starts.push(StartOutcome {
                initial_params: start,
                initial_sse: f64::INFINITY,
                final_sse: f64::INFINITY,
                converged: false,
                iterations: 0,
            }),
        }
    }

    let (winner_start, sse_log, params, _) =
        best.ok_or(FitError::NoFeasibleStart(model))?;

    let mean_y: f64 = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let r2_log = if sst > 1e-30 {
        1.0 - sse_log / sst
    } else if sse_log < 1e-20 {
        1.0
    } else {
        f64::NEG_INFINITY
    };

    let converged = starts.iter().any(|s| s.converged && s.final_sse == sse_log);
    let fit = MemoryModelFit {
        model,
        params,
        sse_log,
        r2_log,
        t_range,
        converged,
        starts,
        winner_start,
    };
    if !fit.starts.iter().any(|s| s.converged) {
        return Err(FitError::NotConverged(Box::new(fit)));
    }
    Ok(fit)
}

/// Fit one model over the default range `t = 1..=400`.
pub fn fit_model(model: ModelId, curve: &MeanCurve) -> Result<MemoryModelFit, FitError> {
    fit_model_range(model, curve, (1, 400))
}

/// Fit every catalog entry and rank by `r2_log` (ties: fewer parameters,
/// then catalog order). Individual failures are recorded, not fatal.
pub fn compare_models(catalog: &[ModelId], curve: &MeanCurve) -> Result<ModelRanking, ModelError> {
    if catalog.len() < 2 {
        return Err(ModelError::CatalogTooSmall(catalog.len()));
    }
    let mut ranked = Vec::new();
    let mut failures = Vec::new();
    for &model in catalog {
        match fit_model(model, curve) {
            Ok(fit) => ranked.push(fit),
            Err(err) => failures.push((model, err.to_string())),
        }
    }
    ranked.sort_by(|x, y| {
        y.r2_log
            .partial_cmp(&x.r2_log)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.params.len().cmp(&y.params.len()))
    });
    Ok(ModelRanking { ranked, failures })
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelRanking {
    pub ranked: Vec<MemoryModelFit>,
    pub failures: Vec<(ModelId, String)>,
}
