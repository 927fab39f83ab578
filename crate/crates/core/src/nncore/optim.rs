use crate::error::{Error, Result};

use super::network::{Gradients, NetworkParams};

pub const DEFAULT_RMS_DECAY: f64 = 0.9;
pub const DEFAULT_RMS_EPSILON: f64 = 1e-8;

/// RMSProp accumulator for one network.
///
/// `v <- decay * v + (1 - decay) * g^2`, `theta <- theta - lr * g / (sqrt(v) + eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsPropState {
    /// One buffer per parameter slice, in [`NetworkParams::param_slices_mut`] order.
    pub v: Vec<Vec<f64>>,
    pub decay: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl RmsPropState {
    pub fn new(params: &NetworkParams, learning_rate: f64) -> Self {
        Self {
            v: params.param_slices().iter().map(|s| vec![0.0; s.len()]).collect(),
            decay: DEFAULT_RMS_DECAY,
            epsilon: DEFAULT_RMS_EPSILON,
            learning_rate,
        }
    }

    pub fn step(&mut self, params: &mut NetworkParams, grads: &Gradients) -> Result<()> {
        let gs = grads.slices();
        let mut ps = params.param_slices_mut();
        if gs.len() != ps.len() || gs.len() != self.v.len() {
            return Err(Error::arg("rmsprop_step", "gradient layout does not match parameters"));
        }
        for ((p, g), v) in ps.iter_mut().zip(&gs).zip(&mut self.v) {
            if p.len() != g.len() || p.len() != v.len() {
                return Err(Error::arg("rmsprop_step", "slice length mismatch"));
            }
            rmsprop_update(p, g, v, self.decay, self.epsilon, self.learning_rate);
        }
        Ok(())
    }
}

/// Elementwise RMSProp update on flat buffers.
pub fn rmsprop_update(params: &mut [f64], grads: &[f64], v: &mut [f64], decay: f64, eps: f64, lr: f64) {
    for ((p, &g), v) in params.iter_mut().zip(grads).zip(v.iter_mut()) {
        *v = decay * *v + (1.0 - decay) * g * g;
        *p -= lr * g / (v.sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_from_zero_state() {
        let (mut p, mut v) = (vec![0.0], vec![0.0]);
        rmsprop_update(&mut p, &[1.0], &mut v, 0.9, 1e-8, 0.1);
        assert!((v[0] - 0.1).abs() < 1e-15);
        let expected = -0.1 / (0.1f64.sqrt() + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] + 0.3162).abs() < 1e-4);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let (mut p, mut v) = (vec![1.5, -2.0], vec![0.4, 0.0]);
        rmsprop_update(&mut p, &[0.0, 0.0], &mut v, 0.9, 1e-8, 0.1);
        assert_eq!(p, vec![1.5, -2.0]);
        assert!((v[0] - 0.36).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn opposite_gradients_move_symmetrically() {
        let (mut p, mut v) = (vec![0.0, 0.0], vec![0.0, 0.0]);
        rmsprop_update(&mut p, &[0.7, -0.7], &mut v, 0.9, 1e-8, 0.05);
        assert_eq!(p[0], -p[1]);
        assert!(p[0] < 0.0);
    }
}
