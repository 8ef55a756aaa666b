//! Decay-model catalog.
//!
//! Each model maps a day `t` to a mention fraction. Fitting happens on the
//! log10 scale, so every model also exposes the gradient of the fraction with
//! respect to its natural parameters, and a transform marking which parameters
//! are constrained positive (optimized as logs).

use serde::{Deserialize, Serialize};

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    /// a * t^-b + c
    ShiftedPowerLaw,
    /// a * t^-b
    PowerLaw,
    /// a * exp(-b t)
    Exponential,
    /// a * exp(-b t) + c
    ShiftedExponential,
    /// a * exp(-b t) + c * exp(-d t)
    Biexponential,
    /// a - b * ln t
    Logarithmic,
    /// 1 / (a + b t)
    Hyperbolic,
    /// a * exp(-b sqrt(t))
    SqrtExponential,
    /// a * exp(-b sqrt(t)) + c
    ShiftedSqrtExponential,
}

impl ModelId {
    /// The shifted power law plus the eight alternatives it is compared with.
    pub fn catalog() -> &'static [ModelId] {
        &[
            ModelId::ShiftedPowerLaw,
            ModelId::Exponential,
            ModelId::ShiftedExponential,
            ModelId::Biexponential,
            ModelId::PowerLaw,
            ModelId::Logarithmic,
            ModelId::Hyperbolic,
            ModelId::SqrtExponential,
            ModelId::ShiftedSqrtExponential,
        ]
    }

    pub fn param_count(self) -> usize {
        match self {
            ModelId::PowerLaw
            | ModelId::Exponential
            | ModelId::Logarithmic
            | ModelId::Hyperbolic
            | ModelId::SqrtExponential => 2,
            ModelId::ShiftedPowerLaw
            | ModelId::ShiftedExponential
            | ModelId::ShiftedSqrtExponential => 3,
            ModelId::Biexponential => 4,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::ShiftedPowerLaw => &["a", "b", "c"],
            ModelId::PowerLaw => &["a", "b"],
            ModelId::Exponential => &["a", "b"],
            ModelId::ShiftedExponential => &["a", "b", "c"],
            ModelId::Biexponential => &["a", "b", "c", "d"],
            ModelId::Logarithmic => &["a", "b"],
            ModelId::Hyperbolic => &["a", "b"],
            ModelId::SqrtExponential => &["a", "b"],
            ModelId::ShiftedSqrtExponential => &["a", "b", "c"],
        }
    }

    /// Which natural parameters are constrained positive.
    pub(crate) fn positive_params(self) -> &'static [bool] {
        match self {
            ModelId::ShiftedPowerLaw => &[true, true, true],
            ModelId::PowerLaw => &[true, true],
            ModelId::Exponential => &[true, true],
            ModelId::ShiftedExponential => &[true, true, true],
            ModelId::Biexponential => &[true, true, true, true],
            ModelId::Logarithmic => &[false, false],
            ModelId::Hyperbolic => &[true, true],
            ModelId::SqrtExponential => &[true, true],
            ModelId::ShiftedSqrtExponential => &[true, true, true],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::ShiftedPowerLaw => "shifted_power_law",
            ModelId::PowerLaw => "power_law",
            ModelId::Exponential => "exponential",
            ModelId::ShiftedExponential => "shifted_exponential",
            ModelId::Biexponential => "biexponential",
            ModelId::Logarithmic => "logarithmic",
            ModelId::Hyperbolic => "hyperbolic",
            ModelId::SqrtExponential => "sqrt_exponential",
            ModelId::ShiftedSqrtExponential => "shifted_sqrt_exponential",
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evaluate the model's fraction at day `t`.
///
/// Power-family models are undefined at `t <= 0`; the square-root family
/// needs `t >= 0`; the logarithmic model needs `t > 0`.
pub fn eval_model(model: ModelId, params: &[f64], t: f64) -> Result<f64, ModelError> {
    if params.len() != model.param_count() {
        return Err(ModelError::ParamCount {
            model,
            expected: model.param_count(),
            got: params.len(),
        });
    }
    let domain_ok = match model {
        ModelId::ShiftedPowerLaw | ModelId::PowerLaw | ModelId::Logarithmic => t > 0.0,
        ModelId::SqrtExponential | ModelId::ShiftedSqrtExponential => t >= 0.0,
        _ => true,
    };
    if !domain_ok {
        return Err(ModelError::Domain { model, t });
    }
    Ok(eval_unchecked(model, params, t))
}

pub(crate) fn eval_unchecked(model: ModelId, p: &[f64], t: f64) -> f64 {
    match model {
        ModelId::ShiftedPowerLaw => p[0] * t.powf(-p[1]) + p[2],
        ModelId::PowerLaw => p[0] * t.powf(-p[1]),
        ModelId::Exponential => p[0] * (-p[1] * t).exp(),
        ModelId::ShiftedExponential => p[0] * (-p[1] * t).exp() + p[2],
        ModelId::Biexponential => p[0] * (-p[1] * t).exp() + p[2] * (-p[3] * t).exp(),
        ModelId::Logarithmic => p[0] - p[1] * t.ln(),
        ModelId::Hyperbolic => 1.0 / (p[0] + p[1] * t),
        ModelId::SqrtExponential => p[0] * (-p[1] * t.sqrt()).exp(),
        ModelId::ShiftedSqrtExponential => p[0] * (-p[1] * t.sqrt()).exp() + p[2],
    }
}

/// Gradient of the fraction with respect to the natural parameters.
pub(crate) fn grad_unchecked(model: ModelId, p: &[f64], t: f64, out: &mut [f64]) {
    match model {
        ModelId::ShiftedPowerLaw => {
            let tp = t.powf(-p[1]);
            out[0] = tp;
            out[1] = -p[0] * tp * t.ln();
            out[2] = 1.0;
        }
        ModelId::PowerLaw => {
            let tp = t.powf(-p[1]);
            out[0] = tp;
            out[1] = -p[0] * tp * t.ln();
        }
        ModelId::Exponential => {
            let e = (-p[1] * t).exp();
            out[0] = e;
            out[1] = -t * p[0] * e;
        }
        ModelId::ShiftedExponential => {
            let e = (-p[1] * t).exp();
            out[0] = e;
            out[1] = -t * p[0] * e;
            out[2] = 1.0;
        }
        ModelId::Biexponential => {
            let e1 = (-p[1] * t).exp();
            let e2 = (-p[3] * t).exp();
            out[0] = e1;
            out[1] = -t * p[0] * e1;
            out[2] = e2;
            out[3] = -t * p[2] * e2;
        }
        ModelId::Logarithmic => {
            out[0] = 1.0;
            out[1] = -t.ln();
        }
        ModelId::Hyperbolic => {
            let inv = 1.0 / (p[0] + p[1] * t);
            let inv2 = -inv * inv;
            out[0] = inv2;
            out[1] = t * inv2;
        }
        ModelId::SqrtExponential => {
            let s = t.sqrt();
            let e = (-p[1] * s).exp();
            out[0] = e;
            out[1] = -s * p[0] * e;
        }
        ModelId::ShiftedSqrtExponential => {
            let s = t.sqrt();
            let e = (-p[1] * s).exp();
            out[0] = e;
            out[1] = -s * p[0] * e;
            out[2] = 1.0;
        }
    }
}
