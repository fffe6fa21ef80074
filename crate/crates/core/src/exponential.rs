//! Exponential removal curve over normalized time `t` and thickness `W`:
//!
//! ```text
//! C(t, W) = 1 − e^{−t·s} − t·a·(b + W)·e^{−t·s}
//! ```
//!
//! where the exponent rate `s` is `a + (b + W)` in the literal form and
//! `a·(b + W)` in the product form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{gradient_descent, DescentConfig};
use crate::series::Contaminant;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExponentForm {
    /// `s = a + (b + W)`.
    #[default]
    Literal,
    /// `s = a·(b + W)`.
    Product,
}

impl ExponentForm {
    pub fn as_str(self) -> &'static str {
        match self {
            ExponentForm::Literal => "literal",
            ExponentForm::Product => "product",
        }
    }
}

impl fmt::Display for ExponentForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExponentForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ExponentForm::Literal),
            "product" => Ok(ExponentForm::Product),
            other => Err(Error::InvalidInput(format!(
                "exponent form must be 'literal' or 'product', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpModelParams {
    pub a: f64,
    pub b: f64,
    pub contaminant: Contaminant,
    #[serde(default)]
    pub exponent_form: ExponentForm,
    /// Sum of squared residuals on the fitting data; 0 for published values.
    pub sse: f64,
    pub converged: bool,
}

impl ExpModelParams {
    pub fn new(contaminant: Contaminant, a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            contaminant,
            exponent_form: ExponentForm::Literal,
            sse: 0.0,
            converged: true,
        }
    }

    /// Published Pb²⁺ parameters.
    pub fn lead() -> Self {
        Self::new(Contaminant::Pb, 3.315, 0.829)
    }

    /// Published Methylene Blue parameters.
    pub fn methylene_blue() -> Self {
        Self::new(Contaminant::MethyleneBlue, 2.068, 3.486)
    }

    pub fn published(contaminant: Contaminant) -> Self {
        match contaminant {
            Contaminant::Pb => Self::lead(),
            Contaminant::MethyleneBlue => Self::methylene_blue(),
        }
    }

    pub fn with_form(mut self, form: ExponentForm) -> Self {
        self.exponent_form = form;
        self
    }

    /// True when either parameter went negative during fitting.
    pub fn has_negative_parameter(&self) -> bool {
        self.a < 0.0 || self.b < 0.0
    }
}

/// One fitting observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpDatum {
    pub t_norm: f64,
    pub w: f64,
    pub removal: f64,
}

#[inline]
fn eval_raw(a: f64, b: f64, form: ExponentForm, t: f64, w: f64) -> f64 {
    let rate = match form {
        ExponentForm::Literal => a + (b + w),
        ExponentForm::Product => a * (b + w),
    };
    let decay = (-t * rate).exp();
    1.0 - decay - t * a * (b + w) * decay
}

/// Predicted removal fraction at normalized time `t_norm` and thickness `w` cm.
pub fn exp_model_eval(p: &ExpModelParams, t_norm: f64, w: f64) -> f64 {
    eval_raw(p.a, p.b, p.exponent_form, t_norm, w)
}

/// `grid[i][j] = exp_model_eval(p, t_grid[i], w_grid[j])`.
pub fn exp_model_grid(p: &ExpModelParams, t_grid: &[f64], w_grid: &[f64]) -> Vec<Vec<f64>> {
    t_grid
        .iter()
        .map(|&t| w_grid.iter().map(|&w| exp_model_eval(p, t, w)).collect())
        .collect()
}

pub fn sse(p: &ExpModelParams, data: &[ExpDatum]) -> f64 {
    sse_raw(p.a, p.b, p.exponent_form, data)
}

fn sse_raw(a: f64, b: f64, form: ExponentForm, data: &[ExpDatum]) -> f64 {
    data.iter()
        .map(|d| (d.removal - eval_raw(a, b, form, d.t_norm, d.w)).powi(2))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpFitOptions {
    /// Starting `(a, b)`.
    pub x0: (f64, f64),
    pub exponent_form: ExponentForm,
    pub descent: DescentConfig,
}

impl Default for ExpFitOptions {
    fn default() -> Self {
        Self {
            x0: (1.0, 1.0),
            exponent_form: ExponentForm::Literal,
            descent: DescentConfig {
                max_iters: 50_000,
                tolerance: 1e-20,
                ..DescentConfig::default()
            },
        }
    }
}

/// Least-squares fit of `(a, b)` by gradient descent on the SSE.
pub fn fit_exp_model(
    data: &[ExpDatum],
    contaminant: Contaminant,
    options: &ExpFitOptions,
) -> Result<ExpModelParams> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    if let Some(bad) = data.iter().find(|d| !(0.0..=1.0).contains(&d.t_norm) || !d.w.is_finite() || !d.removal.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "exponential fit needs t_norm in [0, 1] and finite values, got {bad:?}"
        )));
    }
    let form = options.exponent_form;
    let result = gradient_descent(
        |x| sse_raw(x[0], x[1], form, data),
        &[options.x0.0, options.x0.1],
        &options.descent,
    )?;
    Ok(ExpModelParams {
        a: result.x[0],
        b: result.x[1],
        contaminant,
        exponent_form: form,
        sse: result.value,
        converged: result.converged,
    })
}
