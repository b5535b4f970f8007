//! Quasi-Newton minimizer with finite-difference gradients.
//!
//! BFGS on the inverse Hessian with a backtracking Armijo line search that
//! always tries the full step first. Without constraints this is the same
//! iteration an SQP method performs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Stop as soon as the objective is at or below this value.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Central-difference step.
    pub fd_step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { tolerance: 1e-6, max_iter: 500, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimization {
    pub x: Vec<f64>,
    pub value: f64,
    /// Objective after each iteration; entry 0 is the starting value.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Central-difference gradient.
pub fn central_gradient<F>(f: &mut F, x: &[f64], step: f64, evaluations: &mut usize) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        let up = f(&probe)?;
        probe[i] = x[i] - step;
        let down = f(&probe)?;
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * step);
    }
    *evaluations += 2 * x.len();
    Ok(grad)
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 30;
/// Iterations without relative progress above `STALL_RTOL` that end a run.
const STALL_WINDOW: usize = 25;
const STALL_RTOL: f64 = 1e-9;

pub fn minimize<F>(mut f: F, x0: &[f64], options: &OptimizerOptions) -> Result<Minimization>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut evaluations = 1;
    let mut fx = f(x.as_slice())?;
    let mut trace = vec![fx];
    let mut iterations = 0;
    if fx <= options.tolerance || dim == 0 {
        return Ok(Minimization {
            x: x0.to_vec(),
            value: fx,
            trace,
            iterations,
            evaluations,
            converged: fx <= options.tolerance,
        });
    }
    let mut g = DVector::from_vec(central_gradient(&mut f, x.as_slice(), options.fd_step, &mut evaluations)?);
    let mut h = DMatrix::<f64>::identity(dim, dim);
    let mut fresh = true;

    while iterations < options.max_iter {
        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            h.fill_with_identity();
            fresh = true;
            d = -g.clone();
            slope = -g.norm_squared();
        }
        if slope == 0.0 {
            break;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial = &x + alpha * &d;
            let ft = f(trial.as_slice())?;
            evaluations += 1;
            if ft.is_finite() && ft <= fx + ARMIJO * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            let denom = 2.0 * (ft - fx - slope * alpha);
            let next = if denom > 0.0 && ft.is_finite() { -slope * alpha * alpha / denom } else { 0.5 * alpha };
            alpha = next.clamp(0.1 * alpha, 0.5 * alpha);
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                break;
            }
            h.fill_with_identity();
            fresh = true;
            continue;
        };

        iterations += 1;
        let g_new = DVector::from_vec(central_gradient(&mut f, x_new.as_slice(), options.fd_step, &mut evaluations)?);
        let s = &x_new - &x;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh {
                h *= sy / y.norm_squared();
                fresh = false;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ, expanded.
            h += ((1.0 + rho * yhy) * rho) * (&s * s.transpose()) - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
        if fx <= options.tolerance {
            break;
        }
        if trace.len() > STALL_WINDOW {
            let old = trace[trace.len() - 1 - STALL_WINDOW];
            if old - fx <= STALL_RTOL * old.abs().max(1e-300) {
                break;
            }
        }
    }
    Ok(Minimization {
        x: x.as_slice().to_vec(),
        value: fx,
        converged: fx <= options.tolerance,
        trace,
        iterations,
        evaluations,
    })
}
