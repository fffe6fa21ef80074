//! Rebuilding fitted models from the parameters stored in a report.

use pab_core::inputs::gp_row;
use pab_core::series::normalize_time;
use pab_core::{
    exp_model_eval, gp_fit, predict_first_order, Contaminant, Error, ExpModelParams, FitReport,
    GpHyperParams, GpModel, KineticFitResult, ModelKind, Result,
};

/// Parameter names shared by the writers in `commands` and [`FittedModel`].
pub mod keys {
    pub const CONTAMINANT: &str = "contaminant";
    pub const T_LOG_MAX: &str = "t_log_max";
    pub const K: &str = "k";
    pub const LN_C0_FIT: &str = "ln_c0_fit";
    pub const A: &str = "a";
    pub const B: &str = "b";
    pub const EXPONENT_FORM: &str = "exponent_form";
    pub const V: &str = "v";
    pub const W: &str = "w";
    pub const EPSILON: &str = "epsilon";
    pub const TRAIN_T_NORM: &str = "train_t_norm";
    pub const TRAIN_PH: &str = "train_ph";
    pub const TRAIN_W: &str = "train_w";
    pub const TRAIN_Y: &str = "train_y";
}

#[derive(Debug, Clone)]
pub enum FittedModel {
    FirstOrder(KineticFitResult),
    Exponential { params: ExpModelParams, t_log_max: f64 },
    Gaussian { model: GpModel, contaminant: Contaminant, t_log_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub mean: f64,
    pub variance: Option<f64>,
}

fn contaminant_of(r: &FitReport) -> Result<Contaminant> {
    r.text(keys::CONTAMINANT)?
        .parse()
        .map_err(|e: Error| Error::Report(e.to_string()))
}

impl FittedModel {
    pub fn from_report(r: &FitReport) -> Result<Self> {
        match r.model_kind {
            ModelKind::FirstOrder => Ok(FittedModel::FirstOrder(KineticFitResult {
                k: r.scalar(keys::K)?,
                ln_c0_fit: r.scalar(keys::LN_C0_FIT)?,
                r2: r.scalar("r2").unwrap_or(f64::NAN),
                n_points: r.scalar("n_points").map(|n| n as usize).unwrap_or(0),
                degenerate: false,
                final_removal: r.scalar("final_removal").unwrap_or(f64::NAN),
                max_removal: r.scalar("max_removal").unwrap_or(f64::NAN),
            })),
            ModelKind::Exponential => {
                let form = r
                    .text(keys::EXPONENT_FORM)?
                    .parse()
                    .map_err(|e: Error| Error::Report(e.to_string()))?;
                let params = ExpModelParams::new(contaminant_of(r)?, r.scalar(keys::A)?, r.scalar(keys::B)?)
                    .with_form(form);
                Ok(FittedModel::Exponential {
                    params,
                    t_log_max: r.scalar(keys::T_LOG_MAX)?,
                })
            }
            ModelKind::GaussianProcess => {
                let contaminant = contaminant_of(r)?;
                let hp = GpHyperParams::new(r.scalar(keys::V)?, r.vector(keys::W)?.to_vec(), r.scalar(keys::EPSILON)?)?;
                let t = r.vector(keys::TRAIN_T_NORM)?;
                let ph = r.vector(keys::TRAIN_PH)?;
                let w = r.vector(keys::TRAIN_W)?;
                let y = r.vector(keys::TRAIN_Y)?;
                if [ph.len(), w.len(), y.len()].iter().any(|&n| n != t.len()) {
                    return Err(Error::Report("training columns differ in length".into()));
                }
                let x: Vec<Vec<f64>> = (0..t.len()).map(|i| gp_row(contaminant, t[i], ph[i], w[i])).collect();
                Ok(FittedModel::Gaussian {
                    model: gp_fit(&hp, &x, y)?,
                    contaminant,
                    t_log_max: r.scalar(keys::T_LOG_MAX)?,
                })
            }
        }
    }

    pub fn uses_thickness(&self) -> bool {
        !matches!(self, FittedModel::FirstOrder(_))
    }

    /// Concentration in mg/L for first-order models, removal fraction
    /// otherwise. Times are in minutes and must exceed 1.
    pub fn predict(&self, queries: &[(f64, f64)], ph: f64) -> Result<Vec<Point>> {
        if let Some(&(t, _)) = queries.iter().find(|(t, _)| !(*t > 1.0 && t.is_finite())) {
            return Err(Error::InvalidTime { index: 0, t });
        }
        match self {
            FittedModel::FirstOrder(fit) => Ok(queries
                .iter()
                .map(|&(t, _)| Point {
                    mean: predict_first_order(fit, t),
                    variance: None,
                })
                .collect()),
            FittedModel::Exponential { params, t_log_max } => Ok(queries
                .iter()
                .map(|&(t, w)| Point {
                    mean: exp_model_eval(params, normalize_time(t, *t_log_max), w),
                    variance: None,
                })
                .collect()),
            FittedModel::Gaussian {
                model,
                contaminant,
                t_log_max,
            } => {
                let x: Vec<Vec<f64>> = queries
                    .iter()
                    .map(|&(t, w)| gp_row(*contaminant, normalize_time(t, *t_log_max), ph, w))
                    .collect();
                let p = model.predict(&x)?;
                Ok(p.mean
                    .iter()
                    .zip(&p.variance)
                    .map(|(&mean, &v)| Point {
                        mean,
                        variance: Some(v),
                    })
                    .collect())
            }
        }
    }

    pub fn time_denominator(&self) -> Option<f64> {
        match self {
            FittedModel::FirstOrder(_) => None,
            FittedModel::Exponential { t_log_max, .. } | FittedModel::Gaussian { t_log_max, .. } => Some(*t_log_max),
        }
    }
}
