//! Pseudo-first-order kinetics: `ln cₜ = k·t + ln c₀` fitted by ordinary
//! least squares on raw minutes.
//!
//! `k` keeps the sign of the fitted slope, so decaying concentrations give
//! negative rate constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::r_squared_flagged;
use crate::series::ObservationSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticFitResult {
    /// Signed slope of `ln c` against minutes, 1/min.
    pub k: f64,
    /// Intercept, ln(mg/L).
    pub ln_c0_fit: f64,
    /// Coefficient of determination on the log scale.
    pub r2: f64,
    pub n_points: usize,
    /// Set when the log-concentrations are constant; `r2` is then 0.
    pub degenerate: bool,
    /// Removal fraction at the last sample.
    pub final_removal: f64,
    /// Largest removal fraction over the run.
    pub max_removal: f64,
}

pub fn fit_first_order(series: &ObservationSeries) -> Result<KineticFitResult> {
    let t = series.times();
    let conc = series.concentrations();
    if let Some((index, &value)) = conc.iter().enumerate().find(|(_, c)| !(**c > 0.0)) {
        return Err(Error::NonPositiveConcentration { index, value });
    }
    let ln_c: Vec<f64> = conc.iter().map(|c| c.ln()).collect();
    let (k, ln_c0_fit) = ols_line(&t, &ln_c)?;
    let fitted: Vec<f64> = t.iter().map(|ti| k * ti + ln_c0_fit).collect();
    let (r2, degenerate) = r_squared_flagged(&ln_c, &fitted)?;

    let removal: Vec<f64> = series.to_removal_series()?.iter().map(|p| p.removal).collect();
    Ok(KineticFitResult {
        k,
        ln_c0_fit,
        r2,
        n_points: t.len(),
        degenerate,
        final_removal: *removal.last().expect("series has samples"),
        max_removal: removal.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Least-squares `(slope, intercept)` of `y` on `x`.
fn ols_line(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let x_bar = x.iter().sum::<f64>() / n;
    let y_bar = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - x_bar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all sample times are identical".into()));
    }
    // Σ(x − x̄) = 0, so anchoring y at its first value leaves the slope
    // unchanged and makes a constant series give an exactly zero slope.
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (xi - x_bar) * (yi - y[0]))
        .sum();
    let slope = sxy / sxx;
    Ok((slope, y_bar - slope * x_bar))
}

/// Concentration predicted at `t` minutes.
pub fn predict_first_order(fit: &KineticFitResult, t: f64) -> f64 {
    (fit.k * t + fit.ln_c0_fit).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{Contaminant, Sample};
    use proptest::prelude::*;

    fn schedule() -> Vec<f64> {
        (1..=6)
            .map(|i| 10.0 * i as f64)
            .chain((2..=60).map(|i| 60.0 * i as f64))
            .collect()
    }

    fn series_from(t: &[f64], c: impl Fn(f64) -> f64, c0: f64) -> ObservationSeries {
        let samples = t.iter().map(|&ti| Sample::from_concentration(ti, c(ti), 3.0)).collect();
        ObservationSeries::new(Contaminant::Pb, "k", c0, samples).unwrap()
    }

    /// Independent two-pass OLS on the log scale.
    fn oracle(t: &[f64], c: &[f64]) -> (f64, f64, f64) {
        let y: Vec<f64> = c.iter().map(|v| v.ln()).collect();
        let n = t.len() as f64;
        let (mut st, mut sy) = (0.0, 0.0);
        for i in 0..t.len() {
            st += t[i];
            sy += y[i];
        }
        let (mt, my) = (st / n, sy / n);
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..t.len() {
            num += (t[i] - mt) * (y[i] - my);
            den += (t[i] - mt) * (t[i] - mt);
        }
        let slope = num / den;
        let icpt = my - slope * mt;
        let (mut ss_res, mut ss_tot) = (0.0, 0.0);
        for i in 0..t.len() {
            ss_res += (y[i] - slope * t[i] - icpt).powi(2);
            ss_tot += (y[i] - my).powi(2);
        }
        (slope, icpt, 1.0 - ss_res / ss_tot)
    }

    #[test]
    fn noiseless_log_linear_recovery() {
        let t = schedule();
        let s = series_from(&t, |ti| (-0.0006 * ti + 50f64.ln()).exp(), 50.0);
        let fit = fit_first_order(&s).unwrap();
        assert!((fit.k + 0.0006).abs() < 1e-12, "k = {}", fit.k);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.ln_c0_fit - 50f64.ln()).abs() < 1e-9);
        assert_eq!(fit.n_points, 65);
    }

    #[test]
    fn constant_series_is_flat_and_degenerate() {
        let s = series_from(&schedule(), |_| 50.0, 50.0);
        let fit = fit_first_order(&s).unwrap();
        assert_eq!(fit.k, 0.0);
        assert_eq!(fit.r2, 0.0);
        assert!(fit.degenerate);
        assert_eq!(fit.final_removal, 0.0);
    }

    #[test]
    fn zero_concentration_rejected() {
        let s = series_from(&[10.0, 20.0, 30.0], |t| if t > 25.0 { 0.0 } else { 5.0 }, 50.0);
        assert!(matches!(
            fit_first_order(&s),
            Err(Error::NonPositiveConcentration { index: 2, .. })
        ));
    }

    #[test]
    fn identical_times_are_degenerate() {
        assert!(matches!(ols_line(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn r2_matches_two_pass_oracle() {
        let t = schedule();
        let c: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(i, ti)| 50.0 * (-0.0005 * ti).exp() * (1.0 + 0.05 * ((i * 7 % 5) as f64 - 2.0)))
            .collect();
        let samples = t.iter().zip(&c).map(|(&ti, &ci)| Sample::from_concentration(ti, ci, 3.0)).collect();
        let s = ObservationSeries::new(Contaminant::Pb, "noisy", 60.0, samples).unwrap();
        let fit = fit_first_order(&s).unwrap();
        let (slope, icpt, r2) = oracle(&t, &c);
        assert!((fit.k - slope).abs() < 1e-12);
        assert!((fit.ln_c0_fit - icpt).abs() < 1e-9);
        assert!((fit.r2 - r2).abs() < 1e-12);
        assert!(fit.r2 < 1.0);
    }

    #[test]
    fn prediction_examples() {
        let mut fit = KineticFitResult {
            k: -0.0006,
            ln_c0_fit: 50f64.ln(),
            r2: 1.0,
            n_points: 3,
            degenerate: false,
            final_removal: 0.0,
            max_removal: 0.0,
        };
        assert!((predict_first_order(&fit, 0.0) - 50.0).abs() < 1e-12);
        let expected = 50.0 * (-2.16f64).exp();
        assert!((predict_first_order(&fit, 3600.0) - expected).abs() < 1e-12);
        assert!((expected - 5.766).abs() < 1e-3);
        fit.k = 0.0;
        assert!((predict_first_order(&fit, 1234.0) - 50.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn noiseless_recovery(k in -1e-2f64..=0.0, c0 in 1.0f64..100.0) {
            let t = schedule();
            let s = series_from(&t, |ti| c0 * (k * ti).exp(), c0);
            let fit = fit_first_order(&s).unwrap();
            prop_assert!((fit.k - k).abs() < 1e-10);
            if k != 0.0 {
                prop_assert!((fit.r2 - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn scale_equivariance(k in -1e-2f64..-1e-5, lambda in 0.1f64..10.0) {
            let t = schedule();
            let wobble = |ti: f64| 40.0 * (k * ti).exp() * (1.0 + 0.1 * (ti / 300.0).sin());
            let base = fit_first_order(&series_from(&t, wobble, 100.0)).unwrap();
            let scaled = fit_first_order(&series_from(&t, |ti| lambda * wobble(ti), 100.0 * lambda)).unwrap();
            prop_assert!((base.k - scaled.k).abs() < 1e-10);
            prop_assert!((scaled.ln_c0_fit - base.ln_c0_fit - lambda.ln()).abs() < 1e-10);
        }

        #[test]
        fn time_shift_invariance(k in -1e-2f64..-1e-5, delta in 0.0f64..1000.0) {
            let t = schedule();
            let shifted: Vec<f64> = t.iter().map(|ti| ti + delta).collect();
            let c = |i: usize| 30.0 * (k * t[i]).exp() * (1.0 + 0.05 * (i as f64).cos());
            let mk = |times: &[f64]| {
                let samples = times.iter().enumerate().map(|(i, &ti)| Sample::from_concentration(ti, c(i), 3.0)).collect();
                ObservationSeries::new(Contaminant::Pb, "s", 50.0, samples).unwrap()
            };
            let a = fit_first_order(&mk(&t)).unwrap();
            let b = fit_first_order(&mk(&shifted)).unwrap();
            prop_assert!((a.k - b.k).abs() < 1e-10);
        }
    }
}
