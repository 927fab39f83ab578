mod common;

use proptest::prelude::*;

use lobspatial::data::{CaseMode, JointMove};
use lobspatial::models::{joint_loglik, joint_pmf, predict_topk, tail_conditional, Family, Model, TailEvent};

fn case_of(two: bool) -> CaseMode {
    if two {
        CaseMode::NextMove
    } else {
        CaseMode::FixedHorizon
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() < tol
}

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pmf_normalizes(f in family(), two in any::<bool>(), seed in 0u64..1000, s in 0u64..1000) {
        let m = common::random_model(f, case_of(two), seed);
        let d = m.as_dyn();
        let state = &common::states(1, s)[0];
        let pmf = joint_pmf(d, &d.prepare(state)).unwrap();
        prop_assert!((pmf.total() - 1.0).abs() < 1e-9, "{}", pmf.total());
        prop_assert!(pmf.probs.iter().all(|p| *p >= 0.0));
        if two {
            prop_assert_eq!(pmf.prob(&d.grid(), JointMove::new(0, 0)), 0.0);
        }
    }

    #[test]
    fn loglik_matches_pmf_entry(f in family(), two in any::<bool>(), seed in 0u64..1000, s in 0u64..1000) {
        let case = case_of(two);
        let m = common::random_model(f, case, seed);
        let d = m.as_dyn();
        let x = d.prepare(&common::states(1, s)[0]);
        let pmf = joint_pmf(d, &x).unwrap();
        let label = common::random_label_in(case, s);
        let ll = joint_loglik(d, &x, label).unwrap();
        prop_assert!(close(ll, pmf.prob(&d.grid(), label).ln(), 1e-10), "{ll}");
    }

    #[test]
    fn topk_is_prefix_and_sorted(f in family(), seed in 0u64..1000, s in 0u64..1000, k in 1usize..30) {
        let m = common::random_model(f, CaseMode::NextMove, seed);
        let d = m.as_dyn();
        let x = d.prepare(&common::states(1, s)[0]);
        let a = predict_topk(d, &x, k).unwrap();
        let b = predict_topk(d, &x, k + 1).unwrap();
        prop_assert_eq!(&a[..], &b[..k]);
        prop_assert!(b.windows(2).all(|w| w[0].1 >= w[1].1));
        let pmf = joint_pmf(d, &x).unwrap();
        let mut all = pmf.probs.clone();
        all.sort_by(|p, q| q.total_cmp(p));
        for (i, (_, p)) in b.iter().enumerate() {
            prop_assert!((p - all[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_rule_matches_heads(two in any::<bool>(), seed in 0u64..1000, s in 0u64..1000) {
        let case = case_of(two);
        let m = common::random_model(Family::Standard, case, seed);
        let d = m.as_dyn();
        let x = d.prepare(&common::states(1, s)[0]);
        let label = common::random_label_in(case, s + 1);
        let (p1, p2) = (d.pmf1(&x).unwrap(), d.pmf2(&x, label.y1).unwrap());
        let joint = p1.prob(&d.grid(), label.y1) * p2.prob(&d.grid(), label.y2);
        prop_assert!(close(joint_loglik(d, &x, label).unwrap(), joint.ln(), 1e-12));
    }

    #[test]
    fn spatial_locality(seed in 0u64..1000, s in 0u64..1000, y_star in 1usize..20, bump in 1u64..5000) {
        let m = common::random_model(Family::Spatial, CaseMode::NextMove, seed);
        let Model::Spatial(sp) = &m else { unreachable!() };
        let base = common::states(1, s).remove(0);
        let mut moved = base.clone();
        let w = sp.local_window;
        // Up-move windows read ask levels up to y* + w and bid levels below w;
        // the near-origin block reads the first 10 levels of each side.
        for j in (y_star + w + 1)..moved.ask_sizes.len() {
            moved.ask_sizes[j] += bump;
        }
        for j in w.max(10)..moved.bid_sizes.len() {
            moved.bid_sizes[j] += bump;
        }
        let (xa, xb) = (m.as_dyn().prepare(&base), m.as_dyn().prepare(&moved));
        let ca = tail_conditional(m.as_dyn(), &xa, TailEvent::AskUp).unwrap();
        let cb = tail_conditional(m.as_dyn(), &xb, TailEvent::AskUp).unwrap();
        let (pa, pb) = (ca.prob(y_star as i64), cb.prob(y_star as i64));
        prop_assert!((pa - pb).abs() <= 1e-14 * pa.max(1e-300) + 1e-300, "{pa} vs {pb}");
        let ha = sp.class_log_probs(&xa, 1, None).unwrap();
        let hb = sp.class_log_probs(&xb, 1, None).unwrap();
        prop_assert!(ha != hb);
    }

    #[test]
    fn next_move_second_component_is_restricted(f in family(), seed in 0u64..1000, s in 0u64..1000, y1 in -10i64..=10) {
        let m = common::random_model(f, CaseMode::NextMove, seed);
        let d = m.as_dyn();
        let x = d.prepare(&common::states(1, s)[0]);
        let c = d.pmf2(&x, y1).unwrap();
        prop_assert!((c.total() - 1.0).abs() < 1e-9);
        if y1 != 0 {
            prop_assert_eq!(c.prob(&d.grid(), 0), 1.0);
        } else {
            prop_assert_eq!(c.prob(&d.grid(), 0), 0.0);
        }
    }
}
