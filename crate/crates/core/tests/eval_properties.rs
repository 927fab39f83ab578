mod common;

use proptest::prelude::*;

use lobspatial::data::{synth_generate, CaseMode, JointMove, LabeledSample, SyntheticGenConfig};
use lobspatial::eval::{
    cross_entropy, direction_comparison, pct_decrease, pct_decrease_matrix, theoretical_pup, topk_accuracy, win_matrix,
};
use lobspatial::models::dist::tie_key;
use lobspatial::models::{joint_pmf, train_model, Family, ModelConfig};
use lobspatial::nncore::TrainConfig;

fn small_model_config(epochs: usize) -> ModelConfig {
    let mut cfg = ModelConfig {
        train: common::small_train_config(),
        spatial_neurons: 12,
        ..ModelConfig::default()
    };
    cfg.train.epochs = epochs;
    cfg
}

fn test_set(n: usize, seed: u64) -> Vec<LabeledSample> {
    let cfg = SyntheticGenConfig {
        n_samples: n,
        seed,
        ..SyntheticGenConfig::default()
    };
    synth_generate(&cfg).unwrap().0
}

proptest! {
    #[test]
    fn theoretical_pup_is_symmetric(a in 0.0f64..1e5, b in 0.0f64..1e5, rho in -0.99f64..0.99) {
        prop_assume!(a + b > 0.0);
        let s = theoretical_pup(a, b, rho).unwrap() + theoretical_pup(b, a, rho).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn win_matrix_recounts(errors in prop::collection::vec(prop::collection::vec(0.5f64..3.0, 3), 1..15)) {
        let w = win_matrix(&errors);
        for i in 0..3 {
            prop_assert_eq!(w[i][i], None);
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let wins = errors.iter().filter(|r| r[i] < r[j]).count();
                let ties = errors.iter().filter(|r| r[i] == r[j]).count();
                prop_assert_eq!(w[i][j], Some(wins));
                prop_assert_eq!(w[i][j].unwrap() + w[j][i].unwrap() + ties, errors.len());
            }
        }
        let pct = pct_decrease_matrix(&errors).unwrap();
        prop_assert!(pct.iter().enumerate().all(|(i, r)| r[i] == 0.0));
    }

    #[test]
    fn pct_decrease_antisymmetry(a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let lhs = pct_decrease(a, b).unwrap();
        let rhs = -pct_decrease(b, a).unwrap() * a / b;
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn topk_accuracy_is_monotone_and_starts_at_accuracy(f in prop::sample::select(Family::ALL.to_vec()), seed in 0u64..100) {
        let m = common::random_model(f, CaseMode::NextMove, seed);
        let d = m.as_dyn();
        let test = test_set(60, seed);
        let acc = topk_accuracy(d, &test, 10).unwrap();
        prop_assert!(acc.windows(2).all(|w| w[0] <= w[1]));
        let hits = test
            .iter()
            .filter(|s| {
                let pmf = joint_pmf(d, &d.prepare(&s.state)).unwrap();
                let best = pmf.probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                // Ties go to the smallest move, then up before down.
                let top = pmf
                    .support
                    .iter()
                    .zip(&pmf.probs)
                    .filter(|(_, p)| **p == best)
                    .map(|(m, _)| *m)
                    .min_by_key(tie_key)
                    .unwrap();
                top == s.label
            })
            .count();
        prop_assert_eq!(acc[0], 100.0 * hits as f64 / test.len() as f64);
    }
}

#[test]
fn coin_flips_cannot_beat_ln2() {
    let coin = |n: usize, seed: u64| -> Vec<LabeledSample> {
        test_set(n, seed)
            .into_iter()
            .enumerate()
            .map(|(i, mut s)| {
                let h = lobspatial::seed::child_seed(seed, &i.to_string());
                s.label = JointMove::new(if h & 1 == 1 { 1 } else { -1 }, 0);
                s
            })
            .collect()
    };
    let (train, val, test) = (coin(3000, 1), coin(300, 2), coin(3000, 3));
    for f in [Family::Naive, Family::Logistic, Family::Spatial] {
        let m = train_model(f, &train, &val, CaseMode::NextMove, &small_model_config(3)).unwrap();
        let ce = cross_entropy(m.model.as_dyn(), &test).unwrap();
        assert!(ce >= std::f64::consts::LN_2 - 0.02, "{f}: {ce}");
    }
}

#[test]
fn theoretical_direction_captures_planted_imbalance() {
    let (train, test) = (test_set(4000, 11), test_set(2000, 12));
    let cfg = TrainConfig {
        epochs: 3,
        ..common::small_train_config()
    };
    let r = direction_comparison(&train, &test, &cfg).unwrap();
    assert!(r.theoretical < std::f64::consts::LN_2, "{r:?}");
    assert!(r.rho.abs() < 1.0);
}
