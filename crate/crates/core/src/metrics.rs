//! Goodness-of-fit statistics: R², RMSE and the observed-vs-predicted slope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub r2: f64,
    pub rmse: f64,
    /// Through-origin slope of observed on predicted; absent when undefined.
    pub obs_pred_slope: Option<f64>,
    pub n: usize,
    /// Set when the observed values have zero variance and R² was reported as 0.
    #[serde(default)]
    pub r2_degenerate: bool,
}

impl FitMetrics {
    pub fn compute(observed: &[f64], predicted: &[f64]) -> Result<Self> {
        let (r2, r2_degenerate) = r_squared_flagged(observed, predicted)?;
        Ok(Self {
            r2,
            rmse: rmse(observed, predicted)?,
            obs_pred_slope: obs_pred_slope(observed, predicted).ok(),
            n: observed.len(),
            r2_degenerate,
        })
    }
}

fn check_pair(observed: &[f64], predicted: &[f64], min_len: usize) -> Result<()> {
    if observed.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            what: "observed vs predicted",
            expected: observed.len(),
            found: predicted.len(),
        });
    }
    if observed.len() < min_len {
        return Err(Error::InsufficientData {
            needed: min_len,
            found: observed.len(),
        });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `1 − SS_res/SS_tot`. Returns 0 when `SS_tot == 0`.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    r_squared_flagged(observed, predicted).map(|(r2, _)| r2)
}

/// Like [`r_squared`], also reporting whether `SS_tot` was zero.
pub fn r_squared_flagged(observed: &[f64], predicted: &[f64]) -> Result<(f64, bool)> {
    check_pair(observed, predicted, 2)?;
    let m = mean(observed);
    let ss_tot: f64 = observed.iter().map(|o| (o - m).powi(2)).sum();
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).powi(2))
        .sum();
    if ss_tot == 0.0 || observed.iter().all(|&o| o == observed[0]) {
        return Ok((0.0, true));
    }
    Ok((1.0 - ss_res / ss_tot, false))
}

pub fn rmse(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(observed, predicted, 1)?;
    let mse = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).powi(2))
        .sum::<f64>()
        / observed.len() as f64;
    Ok(mse.sqrt())
}

/// Through-origin regression slope `Σoᵢpᵢ / Σpᵢ²`.
pub fn obs_pred_slope(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(observed, predicted, 2)?;
    let spp: f64 = predicted.iter().map(|p| p * p).sum();
    if spp == 0.0 {
        return Err(Error::DegenerateFit("all predictions are zero".into()));
    }
    let sop: f64 = observed.iter().zip(predicted).map(|(o, p)| o * p).sum();
    Ok(sop / spp)
}

/// Ordinary least-squares slope of observed on predicted with an intercept.
pub fn obs_pred_slope_with_intercept(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(observed, predicted, 2)?;
    let mp = mean(predicted);
    let mo = mean(observed);
    let spp: f64 = predicted.iter().map(|p| (p - mp).powi(2)).sum();
    if spp == 0.0 {
        return Err(Error::DegenerateFit("predictions have zero variance".into()));
    }
    let sop: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - mo) * (p - mp))
        .sum();
    Ok(sop / spp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn r_squared_examples() {
        let o = [1.0, 2.0, 3.0];
        assert_eq!(r_squared(&o, &o).unwrap(), 1.0);
        // SS_res = 1, SS_tot = 2
        assert_eq!(r_squared(&o, &[1.0, 2.0, 4.0]).unwrap(), 0.5);
        assert_eq!(r_squared(&o, &[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_eq!(r_squared_flagged(&[4.0, 4.0], &[1.0, 2.0]).unwrap(), (0.0, true));
        assert!(r_squared(&o, &[1.0]).is_err());
        assert!(r_squared(&[1.0], &[1.0]).is_err());
        assert!(r_squared(&o, &[10.0, -10.0, 0.0]).unwrap() < 0.0);
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 5.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[1.0], &[2.0]).unwrap(), 1.0);
        assert!(rmse(&[], &[]).is_err());
    }

    #[test]
    fn slope_examples() {
        let o = [0.3, 0.7, 0.9];
        assert_eq!(obs_pred_slope(&o, &o).unwrap(), 1.0);
        let doubled: Vec<f64> = o.iter().map(|v| 2.0 * v).collect();
        assert_eq!(obs_pred_slope(&doubled, &o).unwrap(), 2.0);
        assert_eq!(obs_pred_slope(&[1.0, 2.0], &[2.0, 2.0]).unwrap(), 0.75);
        assert!(matches!(obs_pred_slope(&[1.0, 2.0], &[0.0, 0.0]), Err(Error::DegenerateFit(_))));
        assert!((obs_pred_slope_with_intercept(&[3.0, 5.0, 7.0], &[1.0, 2.0, 3.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bundle_tolerates_zero_predictions() {
        let m = FitMetrics::compute(&[0.0, 1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(m.obs_pred_slope, None);
        assert_eq!(m.n, 2);
    }

    proptest! {
        #[test]
        fn r_squared_affine_invariant(
            o in prop::collection::vec(-10.0f64..10.0, 3..30),
            noise in prop::collection::vec(-1.0f64..1.0, 30),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let p: Vec<f64> = o.iter().zip(&noise).map(|(a, e)| a + e).collect();
            let base = r_squared(&o, &p).unwrap();
            let to: Vec<f64> = o.iter().map(|v| scale * v + shift).collect();
            let tp: Vec<f64> = p.iter().map(|v| scale * v + shift).collect();
            let moved = r_squared(&to, &tp).unwrap();
            prop_assert!((base - moved).abs() < 1e-12 * base.abs().max(1.0));
        }

        #[test]
        fn rmse_symmetric(
            o in prop::collection::vec(-10.0f64..10.0, 1..30),
            d in prop::collection::vec(-3.0f64..3.0, 30),
        ) {
            let p: Vec<f64> = o.iter().zip(&d).map(|(a, e)| a + e).collect();
            prop_assert_eq!(rmse(&o, &p).unwrap(), rmse(&p, &o).unwrap());
        }

        #[test]
        fn self_slope_is_one(o in prop::collection::vec(0.01f64..10.0, 2..30)) {
            prop_assert_eq!(obs_pred_slope(&o, &o).unwrap(), 1.0);
        }
    }
}
