//! Grid search for the barrier thickness with the highest predicted removal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThicknessOptimum {
    pub w: f64,
    pub removal: f64,
}

/// Argmax of `predict(w)` over `w_grid`. Ties go to the smaller thickness,
/// whatever order the grid is given in.
pub fn optimum_thickness_scan<F>(w_grid: &[f64], mut predict: F) -> Result<ThicknessOptimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best: Option<ThicknessOptimum> = None;
    for &w in w_grid {
        let removal = predict(w)?;
        if !removal.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: 0 });
        }
        let better = match best {
            None => true,
            Some(b) => removal > b.removal || (removal == b.removal && w < b.w),
        };
        if better {
            best = Some(ThicknessOptimum { w, removal });
        }
    }
    best.ok_or(Error::InsufficientData { needed: 1, found: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_peak() {
        let r = optimum_thickness_scan(&[0.0, 0.5, 1.0, 1.5], |w| Ok(-(w - 0.5f64).powi(2))).unwrap();
        assert_eq!(r.w, 0.5);
    }

    #[test]
    fn single_and_ties() {
        assert_eq!(optimum_thickness_scan(&[2.0], |_| Ok(0.3)).unwrap().w, 2.0);
        assert_eq!(optimum_thickness_scan(&[1.5, 0.5, 1.0], |_| Ok(0.3)).unwrap().w, 0.5);
        assert!(optimum_thickness_scan(&[], |_| Ok(0.3)).is_err());
    }
}
