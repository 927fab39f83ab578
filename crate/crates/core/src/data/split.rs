use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::lob::LabeledSample;

pub const MIN_SPLIT_SAMPLES: usize = 100;
pub const DEFAULT_TEST_FRACTION: f64 = 0.15;
pub const DEFAULT_VAL_FRACTION: f64 = 0.05;

/// Disjoint index sets covering a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Hold out the chronologically last `test_fraction` as test, then split the
/// remaining pool at random so that validation is `floor(val_fraction * pool)`.
///
/// Index lists are returned in ascending order.
pub fn split(samples: &[LabeledSample], test_fraction: f64, val_fraction: f64, master_seed: u64) -> Result<DatasetSplit> {
    let n = samples.len();
    if n < MIN_SPLIT_SAMPLES {
        return Err(Error::arg(
            "split",
            format!("need at least {MIN_SPLIT_SAMPLES} samples, got {n}"),
        ));
    }
    if !(0.0..1.0).contains(&test_fraction) || !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::arg("split", "fractions must lie in [0, 1)"));
    }
    let mut by_time: Vec<usize> = (0..n).collect();
    by_time.sort_by_key(|&i| (samples[i].timestamp, i));
    let n_test = (test_fraction * n as f64).round() as usize;
    let pool_len = n - n_test;
    let mut test = by_time.split_off(pool_len);
    let mut pool = by_time;
    pool.sort_unstable();
    pool.shuffle(&mut seed::rng_for(master_seed, "split"));
    let n_val = (val_fraction * pool_len as f64).floor() as usize;
    let mut validation = pool.split_off(pool_len - n_val);
    let mut train = pool;
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(DatasetSplit { train, validation, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::lob::{JointMove, LOBState};

    pub(crate) fn samples(n: usize) -> Vec<LabeledSample> {
        (0..n)
            .map(|i| LabeledSample {
                timestamp: i as i64,
                state: LOBState {
                    timestamp: i as i64,
                    best_ask_price: 2,
                    best_bid_price: 1,
                    ask_sizes: vec![0; 50],
                    bid_sizes: vec![0; 50],
                    halted: false,
                },
                label: JointMove::new(0, 1),
            })
            .collect()
    }

    #[test]
    fn thousand_sample_arithmetic() {
        let s = split(&samples(1000), 0.15, 0.05, 9).unwrap();
        assert_eq!(s.test.len(), 150);
        assert_eq!(s.test, (850..1000).collect::<Vec<_>>());
        assert_eq!(s.validation.len(), 42);
        assert_eq!(s.train.len(), 808);
    }

    #[test]
    fn deterministic_and_covering() {
        let data = samples(537);
        let a = split(&data, 0.15, 0.05, 3).unwrap();
        assert_eq!(a, split(&data, 0.15, 0.05, 3).unwrap());
        assert_ne!(a, split(&data, 0.15, 0.05, 4).unwrap());
        let mut all: Vec<usize> = a.train.iter().chain(&a.validation).chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..537).collect::<Vec<_>>());
    }

    #[test]
    fn too_few_samples() {
        assert!(split(&samples(99), 0.15, 0.05, 0).is_err());
    }
}
