//! Gaussian Process regression with an ARD exponential-decay kernel
//!
//! ```text
//! k(x, x') = v · exp(−Σₚ wₚ (xₚ − x'ₚ)²)
//! ```
//!
//! Training adds the jitter `ε` to the diagonal of `K(X, X)` only. Prediction
//! is noise-free: the cross-covariances and the prior variance at a query
//! point carry no `ε`.
//!
//! Inputs are used as given. For the bundled contaminants the columns are
//! `(t_norm, pH, W)` for Pb²⁺ and `(t_norm, W)` for Methylene Blue.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, solve, CholeskyFactor, SymMatrix};
use crate::optimize::{gradient_descent, DescentConfig};
use crate::rng::NoiseStream;
use crate::series::Contaminant;

/// Diagonal jitter used unless the caller picks another.
pub const DEFAULT_JITTER: f64 = 1.490116e-08;

/// Posterior variances below zero by less than this are numerical noise.
pub const VARIANCE_CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperParams {
    /// Signal variance.
    pub v: f64,
    /// Per-dimension inverse squared length weights.
    pub w: Vec<f64>,
    /// Diagonal jitter added to the training covariance.
    pub epsilon: f64,
}

impl GpHyperParams {
    pub fn new(v: f64, w: Vec<f64>, epsilon: f64) -> Result<Self> {
        let hp = Self { v, w, epsilon };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::InvalidInput(format!("signal variance v must be positive, got {}", self.v)));
        }
        if self.w.is_empty() {
            return Err(Error::InvalidInput("at least one kernel weight is required".into()));
        }
        if let Some(w) = self.w.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("kernel weights must be finite and >= 0, got {w}")));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("jitter must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.w.len()
    }

    /// Published Pb²⁺ hyperparameters over `(t_norm, pH, W)`.
    pub fn lead() -> Self {
        Self {
            v: 0.3852,
            w: vec![0.7839, 2.8869, 2.859e-9],
            epsilon: DEFAULT_JITTER,
        }
    }

    /// Published Methylene Blue hyperparameters over `(t_norm, W)`.
    pub fn methylene_blue() -> Self {
        Self {
            v: 0.2397,
            w: vec![14.6899, 2.2309],
            epsilon: DEFAULT_JITTER,
        }
    }

    pub fn published(contaminant: Contaminant) -> Self {
        match contaminant {
            Contaminant::Pb => Self::lead(),
            Contaminant::MethyleneBlue => Self::methylene_blue(),
        }
    }

    /// `v = 1`, all weights 1, default jitter.
    pub fn unit(dims: usize) -> Self {
        Self {
            v: 1.0,
            w: vec![1.0; dims],
            epsilon: DEFAULT_JITTER,
        }
    }

    /// Parses `v=<v>,w=<w1>,<w2>,...[,eps=<e>]`.
    pub fn parse_spec(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidInput(format!("hyperparameter spec '{s}': {msg}"));
        let mut v = None;
        let mut w = Vec::new();
        let mut eps = DEFAULT_JITTER;
        let mut current: Option<&str> = None;
        for token in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = match token.split_once('=') {
                Some((k, val)) => {
                    current = Some(k.trim());
                    (k.trim(), val.trim())
                }
                None => (current.ok_or_else(|| bad("value before any key"))?, token),
            };
            let x: f64 = value.parse().map_err(|_| bad(&format!("'{value}' is not a number")))?;
            match key {
                "v" if v.is_none() => v = Some(x),
                "w" => w.push(x),
                "eps" | "epsilon" => eps = x,
                other => return Err(bad(&format!("unexpected key or repeated value for '{other}'"))),
            }
        }
        Self::new(v.ok_or_else(|| bad("missing v"))?, w, eps)
    }
}

impl fmt::Display for GpHyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v={}", self.v)?;
        for (i, w) in self.w.iter().enumerate() {
            write!(f, "{}{w}", if i == 0 { ",w=" } else { "," })?;
        }
        write!(f, ",eps={}", self.epsilon)
    }
}

impl FromStr for GpHyperParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_spec(s)
    }
}

#[inline]
fn kernel_unchecked(hp: &GpHyperParams, x: &[f64], x2: &[f64]) -> f64 {
    let d: f64 = hp
        .w
        .iter()
        .zip(x.iter().zip(x2))
        .map(|(w, (a, b))| w * (a - b) * (a - b))
        .sum();
    hp.v * (-d).exp()
}

pub fn kernel(hp: &GpHyperParams, x: &[f64], x2: &[f64]) -> Result<f64> {
    for len in [x.len(), x2.len()] {
        if len != hp.dims() {
            return Err(Error::DimensionMismatch {
                what: "kernel input",
                expected: hp.dims(),
                found: len,
            });
        }
    }
    Ok(kernel_unchecked(hp, x, x2))
}

/// Fitted model: training data, the factor of `K + εI` and `α = (K + εI)⁻¹y`.
#[derive(Debug, Clone)]
pub struct GpModel {
    hp: GpHyperParams,
    x_train: Vec<Vec<f64>>,
    y_train: Vec<f64>,
    factor: CholeskyFactor,
    alpha: Vec<f64>,
}

impl GpModel {
    pub fn hyperparams(&self) -> &GpHyperParams {
        &self.hp
    }

    pub fn x_train(&self) -> &[Vec<f64>] {
        &self.x_train
    }

    pub fn y_train(&self) -> &[f64] {
        &self.y_train
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn n(&self) -> usize {
        self.y_train.len()
    }

    /// Diagonal jitter actually used, `ε` unless the factorization escalated.
    pub fn jitter_used(&self) -> f64 {
        self.factor.jitter_used()
    }

    pub fn predict(&self, x_new: &[Vec<f64>]) -> Result<GpPrediction> {
        gp_predict(self, x_new)
    }
}

fn check_rows(what: &'static str, rows: &[Vec<f64>], dims: usize) -> Result<()> {
    for row in rows {
        if row.len() != dims {
            return Err(Error::DimensionMismatch {
                what,
                expected: dims,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("{what} contains a non-finite value")));
        }
    }
    Ok(())
}

pub fn gp_fit(hp: &GpHyperParams, x_train: &[Vec<f64>], y_train: &[f64]) -> Result<GpModel> {
    hp.validate()?;
    let n = x_train.len();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    if y_train.len() != n {
        return Err(Error::DimensionMismatch {
            what: "training targets",
            expected: n,
            found: y_train.len(),
        });
    }
    check_rows("training input", x_train, hp.dims())?;
    if y_train.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidInput("training targets contain a non-finite value".into()));
    }

    let k = SymMatrix::from_fn(n, |i, j| kernel_unchecked(hp, &x_train[i], &x_train[j]));
    let factor = cholesky(&k, hp.epsilon)?;
    let alpha = solve(&factor, y_train)?;
    Ok(GpModel {
        hp: hp.clone(),
        x_train: x_train.to_vec(),
        y_train: y_train.to_vec(),
        factor,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpPrediction {
    pub mean: Vec<f64>,
    /// Latent posterior variance, clamped at zero.
    pub variance: Vec<f64>,
    pub m: usize,
}

impl GpPrediction {
    pub fn std_dev(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v.sqrt()).collect()
    }

    /// Per-query quantile `μ + σ·Φ⁻¹(prob)` of the Gaussian posterior.
    pub fn quantile(&self, prob: f64) -> Result<Vec<f64>> {
        let z = standard_normal_quantile(prob)?;
        Ok(self
            .mean
            .iter()
            .zip(&self.variance)
            .map(|(m, v)| m + v.sqrt() * z)
            .collect())
    }

    /// `draws` samples per query from the marginal posteriors, generated by
    /// pushing seeded uniforms through `Φ⁻¹(u; μ, σ²)`.
    pub fn marginal_draws(&self, draws: usize, seed: u64) -> Vec<Vec<f64>> {
        let standard = Normal::standard();
        let mut noise = NoiseStream::new(seed);
        (0..draws)
            .map(|_| {
                self.mean
                    .iter()
                    .zip(&self.variance)
                    .map(|(m, v)| m + v.sqrt() * standard.inverse_cdf(noise.uniform()))
                    .collect()
            })
            .collect()
    }
}

/// Φ⁻¹(prob) for the standard normal.
pub fn standard_normal_quantile(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidInput(format!("quantile level must be in (0, 1), got {prob}")));
    }
    Ok(Normal::standard().inverse_cdf(prob))
}

pub fn gp_predict(model: &GpModel, x_new: &[Vec<f64>]) -> Result<GpPrediction> {
    check_rows("query input", x_new, model.hp.dims())?;
    let mut mean = Vec::with_capacity(x_new.len());
    let mut variance = Vec::with_capacity(x_new.len());
    for q in x_new {
        let k_star: Vec<f64> = model
            .x_train
            .iter()
            .map(|x| kernel_unchecked(&model.hp, x, q))
            .collect();
        mean.push(dot(&k_star, &model.alpha));
        let z = model.factor.solve_lower(&k_star)?;
        let var = kernel_unchecked(&model.hp, q, q) - dot(&z, &z);
        variance.push(var.max(0.0));
    }
    Ok(GpPrediction {
        m: x_new.len(),
        mean,
        variance,
    })
}

/// Negative log marginal likelihood of the training targets.
pub fn gp_nlml(model: &GpModel) -> f64 {
    let n = model.n() as f64;
    0.5 * dot(&model.y_train, &model.alpha)
        + model.factor.half_log_det()
        + 0.5 * n * (2.0 * std::f64::consts::PI).ln()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GpObjective {
    #[default]
    Nlml,
    /// Squared error on every `HOLDOUT_STRIDE`-th point of a model trained on
    /// the remaining points.
    Sse,
}

impl GpObjective {
    pub const HOLDOUT_STRIDE: usize = 4;

    pub fn as_str(self) -> &'static str {
        match self {
            GpObjective::Nlml => "nlml",
            GpObjective::Sse => "sse",
        }
    }

    pub fn evaluate(self, hp: &GpHyperParams, x: &[Vec<f64>], y: &[f64]) -> Result<f64> {
        match self {
            GpObjective::Nlml => gp_fit(hp, x, y).map(|m| gp_nlml(&m)),
            GpObjective::Sse => holdout_sse(hp, x, y),
        }
    }
}

impl FromStr for GpObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nlml" => Ok(GpObjective::Nlml),
            "sse" => Ok(GpObjective::Sse),
            other => Err(Error::InvalidInput(format!("objective must be 'nlml' or 'sse', got '{other}'"))),
        }
    }
}

fn holdout_sse(hp: &GpHyperParams, x: &[Vec<f64>], y: &[f64]) -> Result<f64> {
    let stride = GpObjective::HOLDOUT_STRIDE;
    let held = |i: usize| i % stride == stride - 1;
    let (mut xt, mut yt, mut xh, mut yh) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, (xi, yi)) in x.iter().zip(y).enumerate() {
        if held(i) {
            xh.push(xi.clone());
            yh.push(*yi);
        } else {
            xt.push(xi.clone());
            yt.push(*yi);
        }
    }
    if xh.is_empty() {
        return Err(Error::InsufficientData {
            needed: stride,
            found: x.len(),
        });
    }
    let pred = gp_fit(hp, &xt, &yt)?.predict(&xh)?;
    Ok(pred.mean.iter().zip(&yh).map(|(p, o)| (p - o).powi(2)).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpOptimization {
    pub hp: GpHyperParams,
    pub objective: GpObjective,
    pub initial_value: f64,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn default_gp_descent() -> DescentConfig {
    DescentConfig {
        max_iters: 500,
        tolerance: 1e-9,
        // One e-fold of any hyperparameter per iteration at most.
        max_step: Some(1.0),
        ..DescentConfig::default()
    }
}

/// Gradient descent over `(ln v, ln wₚ)` with `ε` held fixed.
///
/// Weights that start at exactly zero stay at zero.
pub fn gp_optimize_hyperparams(
    x_train: &[Vec<f64>],
    y_train: &[f64],
    hp0: &GpHyperParams,
    objective: GpObjective,
    config: &DescentConfig,
) -> Result<GpOptimization> {
    hp0.validate()?;
    let free: Vec<usize> = (0..hp0.dims()).filter(|&p| hp0.w[p] > 0.0).collect();
    let unpack = |theta: &[f64]| {
        let mut hp = hp0.clone();
        hp.v = theta[0].exp();
        for (slot, &p) in free.iter().enumerate() {
            hp.w[p] = theta[slot + 1].exp();
        }
        hp
    };
    let mut theta0 = vec![hp0.v.ln()];
    theta0.extend(free.iter().map(|&p| hp0.w[p].ln()));

    let initial_value = objective.evaluate(hp0, x_train, y_train)?;
    let result = gradient_descent(
        |theta| {
            let hp = unpack(theta);
            if hp.validate().is_err() {
                return f64::INFINITY;
            }
            objective.evaluate(&hp, x_train, y_train).unwrap_or(f64::INFINITY)
        },
        &theta0,
        config,
    )?;
    // The descent compares against its own evaluation of theta0, which can
    // differ from hp0 in the last bit through exp(ln(.)).
    let (hp, value) = if result.value < initial_value {
        (unpack(&result.x), result.value)
    } else {
        (hp0.clone(), initial_value)
    };
    Ok(GpOptimization {
        hp,
        objective,
        initial_value,
        value,
        iterations: result.iterations,
        converged: result.converged,
    })
}

/// One draw from the GP prior at `x`, using `L·z` with `L` the factor of
/// `K + εI` and `z` standard normals from [`NoiseStream`].
pub fn gp_prior_draw(hp: &GpHyperParams, x: &[Vec<f64>], seed: u64) -> Result<Vec<f64>> {
    hp.validate()?;
    check_rows("draw input", x, hp.dims())?;
    let n = x.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let k = SymMatrix::from_fn(n, |i, j| kernel_unchecked(hp, &x[i], &x[j]));
    let factor = cholesky(&k, hp.epsilon)?;
    let mut noise = NoiseStream::new(seed);
    let z: Vec<f64> = (0..n).map(|_| noise.standard_normal()).collect();
    Ok((0..n)
        .map(|i| (0..=i).map(|j| factor.lower(i, j) * z[j]).sum())
        .collect())
}
