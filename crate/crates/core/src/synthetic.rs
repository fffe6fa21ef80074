//! Seeded synthetic runs from the kinetic, exponential or GP laws.
//!
//! Noise is additive Gaussian from [`NoiseStream`] seeded with `seed`. GP
//! draws use their own stream seeded with `seed` as well, and the additive
//! noise for the GP generator is taken from a stream seeded with `seed + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponential::{exp_model_eval, ExpModelParams, ExponentForm};
use crate::gp::{gp_prior_draw, GpHyperParams};
use crate::inputs::{gp_row, DEFAULT_PH};
use crate::rng::NoiseStream;
use crate::series::{transform_times, Contaminant, ObservationSeries, Sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// `c(t) = c0·exp(k·t)` with signed `k`.
    FirstOrder { k: f64 },
    ExpModel { a: f64, b: f64, form: ExponentForm },
    /// `removal = mean + f(x)` with `f` drawn from the GP prior.
    GpDraw { hp: GpHyperParams, mean: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: Generator,
    pub contaminant: Contaminant,
    pub run_label: String,
    pub c0: f64,
    pub thickness_w: f64,
    pub ph: Option<f64>,
    /// Minutes, strictly increasing, all above 1.
    pub time_schedule: Vec<f64>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(generator: Generator) -> Self {
        Self {
            generator,
            contaminant: Contaminant::Pb,
            run_label: "synthetic".into(),
            c0: 50.0,
            thickness_w: 3.0,
            ph: None,
            time_schedule: default_schedule(),
            noise_sd: 0.0,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.time_schedule.len() < ObservationSeries::MIN_SAMPLES {
            return bad(format!(
                "time schedule needs at least {} entries",
                ObservationSeries::MIN_SAMPLES
            ));
        }
        if self.time_schedule.iter().any(|t| !(*t > 1.0 && t.is_finite())) {
            return bad("all scheduled times must be finite and above 1 min".into());
        }
        if self.time_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad("time schedule must be strictly increasing".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!("noise sd must be >= 0, got {}", self.noise_sd));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad(format!("c0 must be positive, got {}", self.c0));
        }
        if !(self.thickness_w >= 0.0 && self.thickness_w.is_finite()) {
            return bad(format!("thickness must be >= 0, got {}", self.thickness_w));
        }
        match &self.generator {
            Generator::FirstOrder { k } if !k.is_finite() => bad("k must be finite".into()),
            Generator::ExpModel { a, b, .. } if !(a.is_finite() && b.is_finite()) => {
                bad("a and b must be finite".into())
            }
            Generator::GpDraw { hp, mean } => {
                if hp.dims() != self.contaminant.gp_dims() {
                    return bad(format!(
                        "{} GP draws need {} kernel weights, got {}",
                        self.contaminant,
                        self.contaminant.gp_dims(),
                        hp.dims()
                    ));
                }
                hp.validate().map_err(|e| Error::InvalidSpec(e.to_string()))?;
                if !mean.is_finite() {
                    return bad("GP mean must be finite".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// 10-minute samples through the first hour, then hourly through 3600 min.
pub fn default_schedule() -> Vec<f64> {
    (1..=6)
        .map(|i| 10.0 * i as f64)
        .chain((2..=60).map(|i| 60.0 * i as f64))
        .collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<ObservationSeries> {
    spec.validate()?;
    let t = &spec.time_schedule;
    let w = spec.thickness_w;
    let with_ph = |s: Sample| match spec.ph {
        Some(ph) => s.with_ph(ph),
        None => s,
    };

    let samples: Vec<Sample> = match &spec.generator {
        Generator::FirstOrder { k } => {
            let mut noise = NoiseStream::new(spec.seed);
            t.iter()
                .map(|&ti| {
                    let mut c = spec.c0 * (k * ti).exp();
                    if spec.noise_sd > 0.0 {
                        c += spec.noise_sd * noise.standard_normal();
                    }
                    with_ph(Sample::from_concentration(ti, c.clamp(0.0, spec.c0), w))
                })
                .collect()
        }
        Generator::ExpModel { a, b, form } => {
            let p = ExpModelParams::new(spec.contaminant, *a, *b).with_form(*form);
            let tn = transform_times(t)?.t_norm;
            let mut noise = NoiseStream::new(spec.seed);
            t.iter()
                .zip(&tn)
                .map(|(&ti, &x)| {
                    let mut r = exp_model_eval(&p, x, w);
                    if spec.noise_sd > 0.0 {
                        r += spec.noise_sd * noise.standard_normal();
                    }
                    with_ph(Sample::from_removal(ti, r.clamp(0.0, 1.0), w))
                })
                .collect()
        }
        Generator::GpDraw { hp, mean } => {
            let tn = transform_times(t)?.t_norm;
            let ph = spec.ph.unwrap_or(DEFAULT_PH);
            let x: Vec<Vec<f64>> = tn.iter().map(|&v| gp_row(spec.contaminant, v, ph, w)).collect();
            let draw = gp_prior_draw(hp, &x, spec.seed)?;
            let mut noise = NoiseStream::new(spec.seed.wrapping_add(1));
            t.iter()
                .zip(&draw)
                .map(|(&ti, &f)| {
                    let mut r = mean + f;
                    if spec.noise_sd > 0.0 {
                        r += spec.noise_sd * noise.standard_normal();
                    }
                    with_ph(Sample::from_removal(ti, r.clamp(0.0, 1.0), w))
                })
                .collect()
        }
    };
    ObservationSeries::new(spec.contaminant, spec.run_label.clone(), spec.c0, samples)
}
