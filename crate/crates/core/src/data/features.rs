//! Size normalization, sign convention and imbalance features.
//!
//! The feature vector has `2 * LEVELS + 1` entries: z-scored ask sizes (levels
//! 0..49), negated z-scored bid sizes (levels 0..49), then the spread in ticks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::lob::{LOBState, LEVELS};

pub const FEATURE_DIM: usize = 2 * LEVELS + 1;
pub const SPREAD_INDEX: usize = 2 * LEVELS;

/// Per-level size mean and standard deviation from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub ask_mean: Vec<f64>,
    pub ask_std: Vec<f64>,
    pub bid_mean: Vec<f64>,
    pub bid_std: Vec<f64>,
}

impl NormalizationStats {
    /// Population mean and standard deviation of each level over `states`.
    pub fn fit<'a, I>(states: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a LOBState>,
    {
        let mut n = 0usize;
        let mut sums = [vec![0.0; LEVELS], vec![0.0; LEVELS]];
        let mut sq = [vec![0.0; LEVELS], vec![0.0; LEVELS]];
        let mut all: Vec<&LOBState> = Vec::new();
        for s in states {
            n += 1;
            for j in 0..LEVELS {
                sums[0][j] += s.ask_sizes[j] as f64;
                sums[1][j] += s.bid_sizes[j] as f64;
            }
            all.push(s);
        }
        if n == 0 {
            return Err(Error::arg("NormalizationStats::fit", "no states"));
        }
        let mean: Vec<Vec<f64>> = sums.iter().map(|v| v.iter().map(|x| x / n as f64).collect()).collect();
        for s in &all {
            for j in 0..LEVELS {
                let da = s.ask_sizes[j] as f64 - mean[0][j];
                let db = s.bid_sizes[j] as f64 - mean[1][j];
                sq[0][j] += da * da;
                sq[1][j] += db * db;
            }
        }
        let std: Vec<Vec<f64>> = sq.iter().map(|v| v.iter().map(|x| (x / n as f64).sqrt()).collect()).collect();
        Ok(Self {
            ask_mean: mean[0].clone(),
            ask_std: std[0].clone(),
            bid_mean: mean[1].clone(),
            bid_std: std[1].clone(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        for v in [&self.ask_mean, &self.ask_std, &self.bid_mean, &self.bid_std] {
            if v.len() != LEVELS || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig("normalization stats need 50 finite values per field".into()));
            }
        }
        Ok(())
    }
}

#[inline]
fn zscore(x: f64, mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        (x - mean) / std
    } else {
        x - mean
    }
}

/// Normalized, sign-adjusted feature vector with the spread appended.
pub fn featureize(state: &LOBState, stats: &NormalizationStats) -> Vec<f64> {
    let mut f = Vec::with_capacity(FEATURE_DIM);
    for j in 0..LEVELS {
        f.push(zscore(state.ask_sizes[j] as f64, stats.ask_mean[j], stats.ask_std[j]));
    }
    for j in 0..LEVELS {
        f.push(-zscore(state.bid_sizes[j] as f64, stats.bid_mean[j], stats.bid_std[j]));
    }
    f.push(state.spread() as f64);
    f
}

/// `(V_b - V_a) / (V_a + V_b)` per level; an empty level pair gives 0.
pub fn imbalance_features(state: &LOBState) -> Vec<f64> {
    state
        .ask_sizes
        .iter()
        .zip(&state.bid_sizes)
        .map(|(&a, &b)| imbalance(a, b))
        .collect()
}

#[inline]
pub fn imbalance(ask: u64, bid: u64) -> f64 {
    let total = ask as f64 + bid as f64;
    if total == 0.0 {
        0.0
    } else {
        (bid as f64 - ask as f64) / total
    }
}

/// Direction of a price move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn of(y: i64) -> Option<Direction> {
        match y.signum() {
            1 => Some(Direction::Up),
            -1 => Some(Direction::Down),
            _ => None,
        }
    }
}

/// Normalized size feature `offset` levels beyond the reference price of a move.
///
/// Up moves are measured from the best ask outward through the ask side;
/// negative offsets step down through the spread (treated as size 0) and then
/// into the bid side. Down moves mirror this from the best bid. Levels beyond
/// the 50 recorded ones read as 0.
pub fn ladder_value(features: &[f64], spread: i64, dir: Direction, offset: i64) -> f64 {
    let (near, far) = match dir {
        Direction::Up => (0, LEVELS),
        Direction::Down => (LEVELS, 0),
    };
    let level = |base: usize, k: i64| -> f64 {
        if (0..LEVELS as i64).contains(&k) {
            features[base + k as usize]
        } else {
            0.0
        }
    };
    if offset >= 0 {
        level(near, offset)
    } else {
        let k = -offset - spread.max(1);
        if k < 0 {
            0.0
        } else {
            level(far, k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(ask: Vec<u64>, bid: Vec<u64>) -> LOBState {
        LOBState {
            timestamp: 0,
            best_ask_price: 102,
            best_bid_price: 100,
            ask_sizes: ask,
            bid_sizes: bid,
            halted: false,
        }
    }

    #[test]
    fn featureize_examples() {
        let a: Vec<LOBState> = (0..4)
            .map(|i| st((0..50).map(|j| j + 10 * i).collect(), (0..50).map(|j| 2 * j + i).collect()))
            .collect();
        let stats = NormalizationStats::fit(&a).unwrap();
        let mean_state = st(
            stats.ask_mean.iter().map(|&m| m as u64).collect(),
            stats.bid_mean.iter().map(|&m| m as u64).collect(),
        );
        let f = featureize(&mean_state, &stats);
        assert_eq!(f.len(), FEATURE_DIM);
        assert_eq!(f[SPREAD_INDEX], 2.0);

        let stats = NormalizationStats {
            ask_mean: vec![10.0; 50],
            ask_std: vec![2.0; 50],
            bid_mean: vec![20.0; 50],
            bid_std: vec![5.0; 50],
        };
        let mut s = st(vec![10; 50], vec![20; 50]);
        assert!(featureize(&s, &stats)[..100].iter().all(|v| *v == 0.0));
        s.ask_sizes[3] = 12;
        s.bid_sizes[7] = 25;
        let f = featureize(&s, &stats);
        assert_eq!(f[3], 1.0);
        assert_eq!(f[50 + 7], -1.0);
    }

    #[test]
    fn zero_std_level_is_centered() {
        let stats = NormalizationStats {
            ask_mean: vec![4.0; 50],
            ask_std: vec![0.0; 50],
            bid_mean: vec![4.0; 50],
            bid_std: vec![0.0; 50],
        };
        let f = featureize(&st(vec![7; 50], vec![1; 50]), &stats);
        assert_eq!(f[0], 3.0);
        assert_eq!(f[50], 3.0);
    }

    #[test]
    fn imbalance_examples() {
        assert_eq!(imbalance(5, 5), 0.0);
        assert_eq!(imbalance(1, 3), 0.5);
        assert_eq!(imbalance(0, 4), 1.0);
        assert_eq!(imbalance(0, 0), 0.0);
    }

    #[test]
    fn ladder_walks_through_spread() {
        let f: Vec<f64> = (0..FEATURE_DIM).map(|i| i as f64).collect();
        // Spread of 3: offsets -1, -2 are empty ticks, -3 is the best bid.
        assert_eq!(ladder_value(&f, 3, Direction::Up, 0), 0.0);
        assert_eq!(ladder_value(&f, 3, Direction::Up, 4), 4.0);
        assert_eq!(ladder_value(&f, 3, Direction::Up, -1), 0.0);
        assert_eq!(ladder_value(&f, 3, Direction::Up, -3), 50.0);
        assert_eq!(ladder_value(&f, 3, Direction::Up, -5), 52.0);
        assert_eq!(ladder_value(&f, 3, Direction::Up, 50), 0.0);
        assert_eq!(ladder_value(&f, 1, Direction::Down, 2), 52.0);
        assert_eq!(ladder_value(&f, 1, Direction::Down, -1), 0.0);
        assert_eq!(ladder_value(&f, 1, Direction::Down, -2), 1.0);
        assert_eq!(ladder_value(&f, 1, Direction::Down, -60), 0.0);
    }
}
