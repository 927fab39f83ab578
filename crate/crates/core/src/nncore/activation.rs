use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden-unit nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
    Relu,
    /// `min(max(z, 0), clip)`.
    ClippedRelu { clip: f64 },
}

impl ActivationKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ActivationKind::ClippedRelu { clip } if !(clip > 0.0 && clip.is_finite()) => Err(
                Error::InvalidConfig(format!("clipped relu needs a positive finite clip, got {clip}")),
            ),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            ActivationKind::Tanh => u.tanh(),
            ActivationKind::Sigmoid => sigmoid(u),
            ActivationKind::Relu => u.max(0.0),
            ActivationKind::ClippedRelu { clip } => u.max(0.0).min(clip),
        }
    }

    /// Derivative at pre-activation `u` whose image is `a`.
    #[inline]
    pub fn derivative(&self, u: f64, a: f64) -> f64 {
        match *self {
            ActivationKind::Tanh => 1.0 - a * a,
            ActivationKind::Sigmoid => a * (1.0 - a),
            ActivationKind::Relu => {
                if u > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::ClippedRelu { clip } => {
                if u > 0.0 && u < clip {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Closed range of the unit's output, `None` when unbounded.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            ActivationKind::Tanh => Some((-1.0, 1.0)),
            ActivationKind::Sigmoid => Some((0.0, 1.0)),
            ActivationKind::Relu => None,
            ActivationKind::ClippedRelu { clip } => Some((0.0, clip)),
        }
    }

    /// Distance from `u` to the nearest point where the activation is not
    /// differentiable; infinite for smooth activations.
    pub fn kink_distance(&self, u: f64) -> f64 {
        match *self {
            ActivationKind::Relu => u.abs(),
            ActivationKind::ClippedRelu { clip } => u.abs().min((u - clip).abs()),
            _ => f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bounds().is_some()
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
