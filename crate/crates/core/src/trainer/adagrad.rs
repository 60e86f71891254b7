//! Online AdaGrad with an L2 term folded into the gradient.

use crate::error::{Error, Result};

pub const ADAGRAD_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaGrad {
    pub eta: f64,
    pub lambda: f64,
    pub epsilon: f64,
}

impl AdaGrad {
    pub fn new(eta: f64, lambda: f64) -> Self {
        Self {
            eta,
            lambda,
            epsilon: ADAGRAD_EPSILON,
        }
    }

    /// One coordinate: `g' = g + λθ`, `G += g'²`, `θ -= η g' / (√G + ε)`.
    #[inline]
    pub fn step(&self, param: &mut f64, grad: f64, accumulator: &mut f64) -> Result<()> {
        if !grad.is_finite() {
            return Err(Error::NonFinite("gradient".into()));
        }
        let g = grad + self.lambda * *param;
        if g == 0.0 {
            return Ok(());
        }
        *accumulator += g * g;
        *param -= self.eta * g / (accumulator.sqrt() + self.epsilon);
        Ok(())
    }

    /// Dense update over matching slices.
    pub fn step_slice(&self, params: &mut [f64], grads: &[f64], accumulators: &mut [f64]) -> Result<()> {
        if params.len() != grads.len() || params.len() != accumulators.len() {
            return Err(Error::Dimension(format!(
                "adagrad over {} params, {} grads, {} accumulators",
                params.len(),
                grads.len(),
                accumulators.len()
            )));
        }
        for ((p, &g), a) in params.iter_mut().zip(grads).zip(accumulators.iter_mut()) {
            self.step(p, g, a)?;
        }
        Ok(())
    }

    /// Current step size for a coordinate with accumulator `g2`.
    pub fn effective_rate(&self, accumulator: f64) -> f64 {
        self.eta / (accumulator.sqrt() + self.epsilon)
    }
}

/// Free-function form of [`AdaGrad::step`].
pub fn adagrad_step(param: &mut f64, grad: f64, accumulator: &mut f64, eta: f64, lambda: f64) -> Result<()> {
    AdaGrad::new(eta, lambda).step(param, grad, accumulator)
}
