//! Pooling one or more runs into regression inputs.
//!
//! Times from all runs share one normalization denominator, so runs of
//! different length stay on a common time axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponential::ExpDatum;
use crate::series::{normalize_time, transform_times, Contaminant, ObservationSeries};

/// pH assumed for samples that carry none.
pub const DEFAULT_PH: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSet {
    pub contaminant: Contaminant,
    pub t_raw: Vec<f64>,
    pub t_norm: Vec<f64>,
    pub ph: Vec<f64>,
    pub w: Vec<f64>,
    /// Removal fractions.
    pub y: Vec<f64>,
    /// `max ln(t_raw)` over the pooled samples.
    pub denominator: f64,
    /// True when at least one pH value was filled with the default.
    pub ph_assumed: bool,
}

impl RegressionSet {
    pub fn from_series(series: &[ObservationSeries], default_ph: f64) -> Result<Self> {
        let first = series
            .first()
            .ok_or(Error::InsufficientData { needed: 1, found: 0 })?;
        let contaminant = first.contaminant();
        if let Some(other) = series.iter().find(|s| s.contaminant() != contaminant) {
            return Err(Error::InvalidInput(format!(
                "cannot pool {} run '{}' with {} runs",
                other.contaminant(),
                other.run_label(),
                contaminant
            )));
        }
        let mut set = Self {
            contaminant,
            t_raw: Vec::new(),
            t_norm: Vec::new(),
            ph: Vec::new(),
            w: Vec::new(),
            y: Vec::new(),
            denominator: 0.0,
            ph_assumed: false,
        };
        for s in series {
            for p in s.to_removal_series()? {
                set.t_raw.push(p.t_raw);
                set.ph.push(p.ph.unwrap_or(default_ph));
                set.ph_assumed |= p.ph.is_none();
                set.w.push(p.thickness_w);
                set.y.push(p.removal);
            }
        }
        let transformed = transform_times(&set.t_raw)?;
        set.t_norm = transformed.t_norm;
        set.denominator = transformed.denominator;
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn normalize(&self, t_raw: f64) -> f64 {
        normalize_time(t_raw, self.denominator)
    }

    pub fn exp_data(&self) -> Vec<ExpDatum> {
        (0..self.len())
            .map(|i| ExpDatum {
                t_norm: self.t_norm[i],
                w: self.w[i],
                removal: self.y[i],
            })
            .collect()
    }

    /// GP input rows in this contaminant's column order.
    pub fn gp_inputs(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|i| gp_row(self.contaminant, self.t_norm[i], self.ph[i], self.w[i]))
            .collect()
    }
}

/// `(t_norm, pH, W)` for Pb²⁺, `(t_norm, W)` for Methylene Blue.
pub fn gp_row(contaminant: Contaminant, t_norm: f64, ph: f64, w: f64) -> Vec<f64> {
    if contaminant.uses_ph() {
        vec![t_norm, ph, w]
    } else {
        vec![t_norm, w]
    }
}
