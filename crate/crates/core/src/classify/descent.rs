//! Batch gradient descent with backtracking line search.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training knobs shared by the gradient-based fits and the ridge baselines.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Ridge penalty on non-bias weights; 0 disables it.
    pub l2: f64,
    pub max_iter: usize,
    /// Stop when the gradient infinity norm falls below this.
    pub grad_tol: f64,
    /// Line search: initial step, shrink factor, sufficient-decrease constant.
    pub ls_initial: f64,
    pub ls_shrink: f64,
    pub ls_sufficient_decrease: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2: 0.0,
            max_iter: 5000,
            grad_tol: 1e-5,
            ls_initial: 1.0,
            ls_shrink: 0.5,
            ls_sufficient_decrease: 1e-4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l2 < 0.0 {
            return Err(Error::Config(format!("l2 penalty {} must be >= 0", self.l2)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if self.grad_tol.is_nan() || self.grad_tol <= 0.0 {
            return Err(Error::Config("grad_tol must be positive".into()));
        }
        if self.ls_initial.is_nan()
            || self.ls_initial <= 0.0
            || !(0.0..1.0).contains(&self.ls_shrink)
            || !(0.0..1.0).contains(&self.ls_sufficient_decrease)
        {
            return Err(Error::Config("invalid line-search parameters".into()));
        }
        Ok(())
    }
}

/// Differentiable objective for [`minimize`].
pub trait Objective {
    fn value(&self, w: &Array1<f64>) -> f64;
    fn value_grad(&self, w: &Array1<f64>) -> (f64, Array1<f64>);
}

#[derive(Debug, Clone, Copy)]
pub struct DescentReport {
    /// Accepted descent steps.
    pub iterations: usize,
    /// Gradient infinity norm at the returned point.
    pub grad_norm: f64,
    pub converged: bool,
}

fn inf_norm(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Minimize from `w0` by steepest descent with Armijo backtracking.
///
/// The first line search starts at `ls_initial`; later ones warm-start at
/// twice the previously accepted step (capped at `ls_initial`), which keeps
/// the trial count per iteration near one on smooth objectives.
///
/// Stops at `grad_tol`, at `max_iter`, or when no finite decrease is
/// possible at machine precision. A persistently non-finite objective is an
/// error (it signals a data scaling problem).
pub fn minimize<O: Objective>(
    objective: &O,
    w0: Array1<f64>,
    config: &TrainConfig,
) -> Result<(Array1<f64>, DescentReport)> {
    config.validate()?;
    let mut w = w0;
    let (mut value, mut grad) = objective.value_grad(&w);
    if !value.is_finite() {
        return Err(Error::Numeric(
            "objective is non-finite at the starting point; check data scaling".into(),
        ));
    }

    let mut iterations = 0;
    let mut last_step = config.ls_initial;
    loop {
        let grad_norm = inf_norm(&grad);
        if grad_norm <= config.grad_tol {
            return Ok((w, DescentReport { iterations, grad_norm, converged: true }));
        }
        if iterations >= config.max_iter {
            return Ok((w, DescentReport { iterations, grad_norm, converged: false }));
        }

        let grad_sq = grad.dot(&grad);
        let mut step = (2.0 * last_step).min(config.ls_initial);
        let mut accepted = false;
        let mut all_nonfinite = true;
        while step > 1e-18 {
            let candidate = &w - &(step * &grad);
            let trial = objective.value(&candidate);
            if trial.is_finite() {
                all_nonfinite = false;
                if trial <= value - config.ls_sufficient_decrease * step * grad_sq {
                    let (v, g) = objective.value_grad(&candidate);
                    w = candidate;
                    value = v;
                    grad = g;
                    accepted = true;
                    last_step = step;
                    break;
                }
            }
            step *= config.ls_shrink;
        }
        if !accepted {
            if all_nonfinite {
                return Err(Error::Numeric(
                    "objective stayed non-finite along the descent direction; \
                     check data scaling"
                        .into(),
                ));
            }
            // no representable decrease left; report the point we reached
            let grad_norm = inf_norm(&grad);
            return Ok((w, DescentReport { iterations, grad_norm, converged: false }));
        }
        iterations += 1;
    }
}
