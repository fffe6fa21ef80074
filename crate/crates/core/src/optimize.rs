//! Gradient descent with finite-difference gradients and a backtracking step.
//!
//! Gradients come from central finite differences. Each iteration tries a
//! step along the negative gradient, halving the step until the objective
//! decreases; an accepted step doubles the step size for the next iteration.
//! An optional cap bounds the Euclidean length of any single move.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub initial_step: f64,
    /// Stop once an accepted step improves the objective by less than this.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Halvings tried per iteration before declaring a stationary point.
    pub max_backtracks: usize,
    /// Step multiplier applied after an accepted step.
    pub growth: f64,
    /// Upper bound on `|Δx|` per iteration, if any.
    pub max_step: Option<f64>,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            tolerance: 1e-12,
            max_iters: 10_000,
            max_backtracks: 60,
            growth: 2.0,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Number of accepted descent steps.
    pub iterations: usize,
    /// True when a stopping rule fired before `max_iters`.
    pub converged: bool,
}

/// Central-difference gradient with per-coordinate step `max(1e-6, 1e-6·|xᵢ|)`.
pub fn finite_difference_gradient<F>(objective: &mut F, x: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = (1e-6 * x[i].abs()).max(1e-6);
            probe[i] = x[i] + h;
            let up = objective(&probe);
            probe[i] = x[i] - h;
            let down = objective(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Minimizes `objective` starting at `x0`.
///
/// The returned point never has a higher objective than `x0`. Candidate
/// points where the objective is non-finite are treated as rejected steps;
/// a non-finite value at `x0` or in a gradient evaluation is an error.
pub fn gradient_descent<F>(mut objective: F, x0: &[f64], config: &DescentConfig) -> Result<DescentResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if config.max_iters == 0 {
        return Err(Error::InvalidInput("max_iters must be at least 1".into()));
    }
    let mut x = x0.to_vec();
    let mut value = objective(&x);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut step = config.initial_step;
    let mut accepted = 0;
    let mut converged = false;

    'outer: for iter in 0..config.max_iters {
        let grad = finite_difference_gradient(&mut objective, &x);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteObjective { iteration: iter });
        }
        if grad.iter().all(|&g| g == 0.0) {
            converged = true;
            break;
        }

        if let Some(cap) = config.max_step {
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            step = step.min(cap / norm);
        }

        let mut candidate = vec![0.0; x.len()];
        for _ in 0..=config.max_backtracks {
            for ((c, xi), gi) in candidate.iter_mut().zip(&x).zip(&grad) {
                *c = xi - step * gi;
            }
            let trial = objective(&candidate);
            if trial.is_finite() && trial < value {
                let improvement = value - trial;
                std::mem::swap(&mut x, &mut candidate);
                value = trial;
                accepted += 1;
                step *= config.growth;
                if improvement < config.tolerance {
                    converged = true;
                    break 'outer;
                }
                continue 'outer;
            }
            step *= 0.5;
        }
        // No decrease found along the gradient at any tried step length.
        converged = true;
        break;
    }

    Ok(DescentResult {
        x,
        value,
        iterations: accepted,
        converged,
    })
}
