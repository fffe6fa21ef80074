//! Experimental runs, removal fractions and the log-time transform.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on removal fractions and on concentration/removal consistency.
pub const REMOVAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contaminant {
    Pb,
    MethyleneBlue,
}

impl Contaminant {
    /// Whether pH is a regressor for this contaminant's GP inputs.
    pub fn uses_ph(self) -> bool {
        matches!(self, Contaminant::Pb)
    }

    /// GP input dimension: (time, pH, W) for Pb, (time, W) for Methylene Blue.
    pub fn gp_dims(self) -> usize {
        if self.uses_ph() {
            3
        } else {
            2
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Contaminant::Pb => "pb",
            Contaminant::MethyleneBlue => "methylene-blue",
        }
    }
}

impl fmt::Display for Contaminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Contaminant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pb" | "pb2+" | "lead" => Ok(Contaminant::Pb),
            "mb" | "methylene-blue" | "methylene_blue" => Ok(Contaminant::MethyleneBlue),
            other => Err(Error::InvalidInput(format!("unknown contaminant '{other}'"))),
        }
    }
}

/// One effluent measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Minutes since the start of the run.
    pub t_raw: f64,
    /// Effluent concentration, mg/L.
    pub concentration: Option<f64>,
    /// `(c0 − c)/c0`, dimensionless.
    pub removal_fraction: Option<f64>,
    /// Barrier thickness, cm.
    pub thickness_w: f64,
    pub ph: Option<f64>,
}

impl Sample {
    pub fn from_concentration(t_raw: f64, concentration: f64, thickness_w: f64) -> Self {
        Self {
            t_raw,
            concentration: Some(concentration),
            removal_fraction: None,
            thickness_w,
            ph: None,
        }
    }

    pub fn from_removal(t_raw: f64, removal_fraction: f64, thickness_w: f64) -> Self {
        Self {
            t_raw,
            concentration: None,
            removal_fraction: Some(removal_fraction),
            thickness_w,
            ph: None,
        }
    }

    pub fn with_ph(mut self, ph: f64) -> Self {
        self.ph = Some(ph);
        self
    }
}

/// A validated, time-ordered experimental run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeries {
    contaminant: Contaminant,
    run_label: String,
    c0: f64,
    samples: Vec<Sample>,
}

impl ObservationSeries {
    pub const MIN_SAMPLES: usize = 3;

    pub fn new(
        contaminant: Contaminant,
        run_label: impl Into<String>,
        c0: f64,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "initial concentration must be positive, got {c0}"
            )));
        }
        if samples.len() < Self::MIN_SAMPLES {
            return Err(Error::InsufficientData {
                needed: Self::MIN_SAMPLES,
                found: samples.len(),
            });
        }
        for (index, s) in samples.iter().enumerate() {
            validate_sample(index, s, c0)?;
            if index > 0 && !(s.t_raw > samples[index - 1].t_raw) {
                return Err(Error::InconsistentSample {
                    index,
                    detail: format!(
                        "time {} is not after previous time {}",
                        s.t_raw,
                        samples[index - 1].t_raw
                    ),
                });
            }
        }
        Ok(Self {
            contaminant,
            run_label: run_label.into(),
            c0,
            samples,
        })
    }

    pub fn contaminant(&self) -> Contaminant {
        self.contaminant
    }

    pub fn run_label(&self) -> &str {
        &self.run_label
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_raw).collect()
    }

    /// Concentration of every sample, deriving it from the removal fraction
    /// where only that was recorded.
    pub fn concentrations(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| match (s.concentration, s.removal_fraction) {
                (Some(c), _) => c,
                (None, Some(r)) => self.c0 * (1.0 - r),
                (None, None) => unreachable!("validated at construction"),
            })
            .collect()
    }

    /// Removal fraction for every sample.
    ///
    /// Recorded fractions are returned unchanged. Fractions derived from
    /// concentrations are clamped into `[0, 1]` when they fall outside by at
    /// most [`REMOVAL_TOLERANCE`].
    pub fn to_removal_series(&self) -> Result<Vec<RemovalPoint>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(index, s)| {
                let removal = match (s.removal_fraction, s.concentration) {
                    (Some(r), _) => r,
                    (None, Some(c)) => removal_from_concentration(index, self.c0, c)?,
                    (None, None) => unreachable!("validated at construction"),
                };
                Ok(RemovalPoint {
                    t_raw: s.t_raw,
                    removal,
                    thickness_w: s.thickness_w,
                    ph: s.ph,
                })
            })
            .collect()
    }

    pub fn transform_time(&self) -> Result<TransformedInputs> {
        transform_times(&self.times())
    }
}

fn validate_sample(index: usize, s: &Sample, c0: f64) -> Result<()> {
    if !(s.t_raw > 0.0 && s.t_raw.is_finite()) {
        return Err(Error::InvalidTime { index, t: s.t_raw });
    }
    if !(s.thickness_w >= 0.0 && s.thickness_w.is_finite()) {
        return Err(Error::InconsistentSample {
            index,
            detail: format!("thickness {} cm must be finite and non-negative", s.thickness_w),
        });
    }
    if let Some(ph) = s.ph {
        if !ph.is_finite() {
            return Err(Error::InconsistentSample {
                index,
                detail: "pH must be finite".into(),
            });
        }
    }
    match (s.concentration, s.removal_fraction) {
        (None, None) => Err(Error::InconsistentSample {
            index,
            detail: "neither concentration nor removal fraction present".into(),
        }),
        (c, r) => {
            if let Some(c) = c {
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::InconsistentSample {
                        index,
                        detail: format!("concentration {c} must be finite and non-negative"),
                    });
                }
            }
            if let Some(r) = r {
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InconsistentSample {
                        index,
                        detail: format!("removal fraction {r} outside [0, 1]"),
                    });
                }
            }
            if let (Some(c), Some(r)) = (c, r) {
                let derived = (c0 - c) / c0;
                if (derived - r).abs() > REMOVAL_TOLERANCE {
                    return Err(Error::InconsistentSample {
                        index,
                        detail: format!(
                            "removal fraction {r} disagrees with concentration {c} (expected {derived})"
                        ),
                    });
                }
            }
            Ok(())
        }
    }
}

fn removal_from_concentration(index: usize, c0: f64, c: f64) -> Result<f64> {
    if c > c0 + REMOVAL_TOLERANCE * c0 {
        return Err(Error::InconsistentSample {
            index,
            detail: format!("concentration {c} exceeds initial concentration {c0}"),
        });
    }
    let r = (c0 - c) / c0;
    if !(-REMOVAL_TOLERANCE..=1.0 + REMOVAL_TOLERANCE).contains(&r) {
        return Err(Error::InconsistentSample {
            index,
            detail: format!("derived removal fraction {r} outside [0, 1]"),
        });
    }
    Ok(r.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemovalPoint {
    pub t_raw: f64,
    pub removal: f64,
    pub thickness_w: f64,
    pub ph: Option<f64>,
}

/// Log-normalized time `ln(t)/max ln(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedInputs {
    pub t_raw: Vec<f64>,
    pub t_norm: Vec<f64>,
    /// `max ln(t_raw)` over the transformed set.
    pub denominator: f64,
}

impl TransformedInputs {
    /// Applies the same normalization to a new raw time.
    pub fn normalize(&self, t_raw: f64) -> f64 {
        normalize_time(t_raw, self.denominator)
    }
}

#[inline]
pub fn normalize_time(t_raw: f64, denominator: f64) -> f64 {
    t_raw.ln() / denominator
}

/// Normalizes raw times in minutes; the largest time maps to exactly 1.
pub fn transform_times(t_raw: &[f64]) -> Result<TransformedInputs> {
    if t_raw.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    if let Some((index, &t)) = t_raw
        .iter()
        .enumerate()
        .find(|(_, t)| !(**t > 1.0 && t.is_finite()))
    {
        return Err(Error::InvalidTime { index, t });
    }
    let logs: Vec<f64> = t_raw.iter().map(|t| t.ln()).collect();
    let denominator = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(TransformedInputs {
        t_raw: t_raw.to_vec(),
        t_norm: logs.iter().map(|l| l / denominator).collect(),
        denominator,
    })
}

/// Mass of contaminant removed per gram of adsorbent, mg/g.
pub fn compute_capacity(c0: f64, ct: f64, volume_l: f64, mass_g: f64) -> Result<f64> {
    let all_finite = [c0, ct, volume_l, mass_g].iter().all(|v| v.is_finite());
    if !all_finite || mass_g <= 0.0 || volume_l <= 0.0 || ct < 0.0 || ct > c0 {
        return Err(Error::InvalidInput(format!(
            "capacity needs mass > 0, volume > 0 and 0 <= ct <= c0 (c0={c0}, ct={ct}, volume={volume_l}, mass={mass_g})"
        )));
    }
    Ok((c0 - ct) * volume_l / mass_g)
}

/// Formats a removal fraction as a percentage with two decimals.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.2}%", fraction * 100.0)
}
