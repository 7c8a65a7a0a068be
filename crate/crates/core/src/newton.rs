//! Damped Newton iteration shared by the logistic prox and the centralized
//! and stacked-system solves.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub(crate) const MAX_ITERS: usize = 100;
/// Once the Newton step is this small relative to `1 + ‖x‖∞`, the full step
/// is taken and the iteration stops; the remaining error is of order step².
pub(crate) const STEP_TOL: f64 = 1e-8;

pub(crate) trait Objective {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// Minimizes a smooth strongly convex objective. Steps are halved until the
/// objective does not increase.
pub(crate) fn minimize<O: Objective>(obj: &O, mut x: DVector<f64>) -> Result<DVector<f64>> {
    let mut phi = obj.value(&x);
    let mut step = DVector::zeros(x.len());
    for _ in 0..MAX_ITERS {
        let g = obj.gradient(&x);
        let h = obj.hessian(&x);
        step = match h.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => h.lu().solve(&g).ok_or(Error::NonConvergence {
                iterations: 0,
                residual: g.norm(),
            })?,
        };
        if step.amax() <= STEP_TOL * (1.0 + x.amax()) {
            return Ok(x - step);
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &x - &step * t;
            let phi_c = obj.value(&cand);
            if phi_c <= phi {
                x = cand;
                phi = phi_c;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERS,
        residual: step.amax(),
    })
}
