//! Variable-span smoother built from local linear fits.
//!
//! For each of three candidate spans the segment is smoothed by an unweighted
//! local linear fit on a nearest-neighbour window, and the absolute
//! leave-one-out residual is computed per point via the hat-diagonal identity.
//! The residuals are themselves smoothed at the midrange span, the span with
//! the smallest smoothed residual is selected pointwise, the selected span
//! values are smoothed once more, and a final local-linear pass runs each
//! point at its selected span.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmootherConfig {
    /// Candidate spans as fractions of the segment length, ascending.
    pub spans: [f64; 3],
    /// Segments shorter than this are passed through unchanged.
    pub min_points: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        SmootherConfig {
            spans: [0.05, 0.2, 0.5],
            min_points: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SmoothOutcome {
    pub values: Vec<f64>,
    /// Set when the segment was too short and was copied unchanged.
    pub passthrough: bool,
}

/// Nearest-neighbour window of `k` points around `i`, clipped to `[0, n)`.
fn window(i: usize, k: usize, n: usize) -> (usize, usize) {
    let k = k.min(n);
    let half = k / 2;
    let mut lo = i.saturating_sub(half);
    let hi = (lo + k).min(n);
    lo = hi.saturating_sub(k);
    (lo, hi)
}

/// Local linear fit over `y[lo..hi]` evaluated at index `at`, plus the
/// leverage of `at` when it lies inside the window.
fn local_linear(y: &[f64], lo: usize, hi: usize, at: usize) -> (f64, f64) {
    let k = (hi - lo) as f64;
    let x_mean = (lo + hi - 1) as f64 / 2.0;
    let mut y_mean = 0.0;
    for value in &y[lo..hi] {
        y_mean += value;
    }
    y_mean /= k;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (j, value) in y[lo..hi].iter().enumerate() {
        let dx = (lo + j) as f64 - x_mean;
        sxx += dx * dx;
        sxy += dx * (value - y_mean);
    }

    let dx_at = at as f64 - x_mean;
    if sxx <= 0.0 {
        // Window degenerates to a single abscissa.
        return (y_mean, 1.0);
    }
    let slope = sxy / sxx;
    let fitted = y_mean + slope * dx_at;
    let leverage = 1.0 / k + dx_at * dx_at / sxx;
    (fitted, leverage)
}

/// Smooth `y` with a fixed window of `k` points; returns fitted values and
/// absolute leave-one-out residuals.
fn fixed_span_smooth(y: &[f64], k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut fitted = Vec::with_capacity(n);
    let mut loo = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = window(i, k, n);
        let (value, leverage) = local_linear(y, lo, hi, i);
        fitted.push(value);
        let denom = (1.0 - leverage).max(1e-12);
        loo.push(((y[i] - value) / denom).abs());
    }
    (fitted, loo)
}

fn span_to_points(span: f64, n: usize) -> usize {
    ((span * n as f64).round() as usize).clamp(3, n)
}

/// Apply the variable-span smoother to one segment.
pub fn supersmooth_segment(y: &[f64], cfg: &SmootherConfig) -> SmoothOutcome {
    let n = y.len();
    if n < cfg.min_points {
        return SmoothOutcome {
            values: y.to_vec(),
            passthrough: true,
        };
    }

    let spans = cfg.spans;
    let k_mid = span_to_points(spans[1], n);

    let mut fits = Vec::with_capacity(3);
    let mut smoothed_resid = Vec::with_capacity(3);
    for &span in &spans {
        let k = span_to_points(span, n);
        let (fitted, loo) = fixed_span_smooth(y, k);
        let (resid_smooth, _) = fixed_span_smooth(&loo, k_mid);
        fits.push(fitted);
        smoothed_resid.push(resid_smooth);
    }

    // Pointwise span selection; ties favour the smaller span.
    let mut selected_span = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = 0;
        for j in 1..3 {
            if smoothed_resid[j][i] < smoothed_resid[best][i] {
                best = j;
            }
        }
        selected_span.push(spans[best]);
    }

    // Smooth the selected spans and run the final pass at them.
    let (span_smooth, _) = fixed_span_smooth(&selected_span, k_mid);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let span = span_smooth[i].clamp(spans[0], spans[2]);
        let k = span_to_points(span, n);
        let (lo, hi) = window(i, k, n);
        let (value, _) = local_linear(y, lo, hi, i);
        values.push(value);
    }

    SmoothOutcome {
        values,
        passthrough: false,
    }
}
