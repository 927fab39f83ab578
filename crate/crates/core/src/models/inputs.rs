//! Network inputs derived from an order-book state.

use crate::data::{featureize, imbalance_features, ladder_value, Direction, LOBState, NormalizationStats, LEVELS};

/// Width of the `y1` encoding appended to every second-component input.
pub const Y1_ENC_DIM: usize = 3;
/// Local window half-width around the candidate level.
pub const DEFAULT_LOCAL_WINDOW: usize = 10;
/// Levels per side in the near-origin block of the local features.
pub const NEAR_LEVELS: usize = 10;

/// `[y1 / 50, sign(y1), 1{y1 = 0}]`.
pub fn y1_encoding(y1: i64) -> [f64; Y1_ENC_DIM] {
    [y1 as f64 / 50.0, y1.signum() as f64, if y1 == 0 { 1.0 } else { 0.0 }]
}

/// Everything the model families read from one state.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFeatures {
    /// Normalized sizes with the sign convention and the spread appended.
    pub x: Vec<f64>,
    /// Per-level order imbalance.
    pub imbalance: Vec<f64>,
    pub spread: i64,
}

impl SampleFeatures {
    pub fn new(state: &LOBState, stats: &NormalizationStats) -> Self {
        Self {
            x: featureize(state, stats),
            imbalance: imbalance_features(state),
            spread: state.spread(),
        }
    }

    /// `x` followed by the `y1` encoding.
    pub fn with_y1(&self, y1: i64) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&y1_encoding(y1));
        v
    }
}

pub fn local_dim(window: usize) -> usize {
    (2 * window + 1) + 2 * NEAR_LEVELS + 1
}

/// Local feature map for the step network at level `y` in direction `dir`:
/// ladder values at offsets `y - window ..= y + window`, the first ten ask and
/// bid features, and `y / 50`.
pub fn local_features(f: &SampleFeatures, dir: Direction, y: i64, window: usize, out: &mut Vec<f64>) {
    let w = window as i64;
    for off in (y - w)..=(y + w) {
        out.push(ladder_value(&f.x, f.spread, dir, off));
    }
    out.extend_from_slice(&f.x[..NEAR_LEVELS]);
    out.extend_from_slice(&f.x[LEVELS..LEVELS + NEAR_LEVELS]);
    out.push(y as f64 / 50.0);
}
