use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lob::LabeledSample;

/// How often the two best prices move together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComovementStats {
    /// `P[y1 = y2 | (y1, y2) != (0, 0)]`.
    pub z: f64,
    /// `P[exactly one of y1, y2 is nonzero | (y1, y2) != (0, 0)]`.
    pub v: f64,
    /// Spread quantiles at 10%, 50% and 90%, in ticks.
    pub spread_quantiles: [f64; 3],
    pub moves: usize,
}

pub fn comovement_stats(samples: &[LabeledSample]) -> Result<ComovementStats> {
    let mut moves = 0usize;
    let mut same = 0usize;
    let mut single = 0usize;
    for s in samples {
        let (a, b) = (s.label.y1, s.label.y2);
        if a == 0 && b == 0 {
            continue;
        }
        moves += 1;
        if a == b {
            same += 1;
        }
        if (a == 0) != (b == 0) {
            single += 1;
        }
    }
    if moves == 0 {
        return Err(Error::arg("comovement_stats", "no sample has a nonzero move"));
    }
    let mut spreads: Vec<f64> = samples.iter().map(|s| s.state.spread() as f64).collect();
    spreads.sort_by(f64::total_cmp);
    Ok(ComovementStats {
        z: same as f64 / moves as f64,
        v: single as f64 / moves as f64,
        spread_quantiles: [quantile(&spreads, 0.1), quantile(&spreads, 0.5), quantile(&spreads, 0.9)],
        moves,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::lob::{JointMove, LOBState};

    fn with_labels(labels: &[(i64, i64)]) -> Vec<LabeledSample> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| LabeledSample {
                timestamp: i as i64,
                state: LOBState {
                    timestamp: i as i64,
                    best_ask_price: 100 + i as i64 + 1,
                    best_bid_price: 100,
                    ask_sizes: vec![1; 50],
                    bid_sizes: vec![1; 50],
                    halted: false,
                },
                label: JointMove::new(a, b),
            })
            .collect()
    }

    #[test]
    fn direct_counts() {
        let s = comovement_stats(&with_labels(&[(1, 1), (1, 0), (0, 0)])).unwrap();
        assert_eq!((s.z, s.v), (0.5, 0.5));
        assert_eq!(s.spread_quantiles[1], 2.0);
        let s = comovement_stats(&with_labels(&[(1, 1), (-2, -2)])).unwrap();
        assert_eq!((s.z, s.v), (1.0, 0.0));
        assert!(comovement_stats(&with_labels(&[(0, 0)])).is_err());
    }
}
