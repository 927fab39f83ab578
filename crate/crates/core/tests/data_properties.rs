mod common;

use proptest::prelude::*;

use lobspatial::data::{
    featureize, imbalance, imbalance_features, label_case1, label_case2, split, synth_generate, CaseMode, LOBState,
    NormalizationStats, Snapshot, SyntheticGenConfig, LEVELS,
};

fn state_strategy() -> impl Strategy<Value = LOBState> {
    (
        prop::collection::vec(0u64..10_000, LEVELS),
        prop::collection::vec(0u64..10_000, LEVELS),
        1i64..5,
        0i64..1_000_000,
    )
        .prop_map(|(ask_sizes, bid_sizes, spread, bid)| LOBState {
            timestamp: 0,
            best_ask_price: bid + spread,
            best_bid_price: bid,
            ask_sizes,
            bid_sizes,
            halted: false,
        })
}

/// A random walk of best prices with one event per nanosecond.
fn price_path() -> impl Strategy<Value = Vec<LOBState>> {
    prop::collection::vec((-2i64..=2, -2i64..=2), 2..60).prop_map(|steps| {
        let (mut ask, mut bid) = (1000i64, 998i64);
        steps
            .into_iter()
            .enumerate()
            .map(|(t, (da, db))| {
                ask += da;
                bid += db;
                if ask <= bid {
                    ask = bid + 1;
                }
                LOBState {
                    timestamp: t as i64,
                    best_ask_price: ask,
                    best_bid_price: bid,
                    ask_sizes: vec![1; LEVELS],
                    bid_sizes: vec![1; LEVELS],
                    halted: false,
                }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn imbalances_lie_in_unit_interval(s in state_strategy(), a in any::<u64>(), b in any::<u64>()) {
        prop_assert!(imbalance_features(&s).iter().all(|v| (-1.0..=1.0).contains(v)));
        prop_assert!((-1.0..=1.0).contains(&imbalance(a, b)));
    }

    #[test]
    fn next_move_labels_never_zero(path in price_path()) {
        let labels = label_case2(&path);
        prop_assert!(labels.iter().all(|s| !s.label.is_zero()));
        let every = label_case1(&path, 1, Snapshot::EveryEvent);
        prop_assert_eq!(every.len(), path.len() - 1);
    }

    #[test]
    fn split_is_disjoint_and_covering(n in 101usize..600, test in 0.05f64..0.5, val in 0.0f64..0.3, seed in any::<u64>()) {
        let samples = label_case1(&common::states(n, 0).into_iter().enumerate().map(|(i, mut s)| {
            s.timestamp = i as i64;
            s
        }).collect::<Vec<_>>(), 1, Snapshot::EveryEvent);
        let sp = split(&samples, test, val, seed).unwrap();
        let mut all: Vec<usize> = sp.train.iter().chain(&sp.validation).chain(&sp.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..samples.len()).collect::<Vec<_>>());
        prop_assert!(sp.test.iter().all(|&t| sp.train.iter().chain(&sp.validation).all(|&i| i < t)));
    }

    #[test]
    fn synthetic_labels_are_supported_and_reproducible(seed in any::<u64>(), two in any::<bool>()) {
        let mut cfg = SyntheticGenConfig { n_samples: 200, seed, ..SyntheticGenConfig::default() };
        cfg.law.case = if two { CaseMode::NextMove } else { CaseMode::FixedHorizon };
        let (a, law) = synth_generate(&cfg).unwrap();
        let (b, _) = synth_generate(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        for s in &a {
            prop_assert!(law.log_prob(&s.state, s.label) > f64::NEG_INFINITY);
            if two {
                prop_assert!(!s.label.is_zero());
            }
        }
    }
}

#[test]
fn training_stats_standardize_the_training_set() {
    let states = common::states(2000, 5);
    let stats = NormalizationStats::fit(&states).unwrap();
    let feats: Vec<Vec<f64>> = states.iter().map(|s| featureize(s, &stats)).collect();
    for j in 0..2 * LEVELS {
        let n = feats.len() as f64;
        let mean = feats.iter().map(|f| f[j]).sum::<f64>() / n;
        let var = feats.iter().map(|f| (f[j] - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-10, "level {j}: mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 1e-10, "level {j}: std {}", var.sqrt());
    }
}
