use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lobspatial::nncore::{
    gradient_check, kink_margin, softmax, step_probability, ActivationKind, DropoutMasks, Gradients, Matrix, Mode, NetworkParams,
    OutputHead, RmsPropState,
};

fn activation() -> impl Strategy<Value = ActivationKind> {
    prop_oneof![
        Just(ActivationKind::Tanh),
        Just(ActivationKind::Sigmoid),
        Just(ActivationKind::Relu),
        (0.5f64..5.0).prop_map(|clip| ActivationKind::ClippedRelu { clip }),
    ]
}

/// Mean softmax cross-entropy and its gradient with respect to the logits.
fn xent(out: &Matrix, labels: &[usize]) -> (f64, Matrix) {
    let b = out.rows();
    let mut up = Matrix::zeros(b, out.cols());
    let mut loss = 0.0;
    for i in 0..b {
        let p = softmax(out.row(i)).unwrap();
        loss -= p[labels[i]].ln();
        for (j, pj) in p.iter().enumerate() {
            up.set(i, j, (pj - if j == labels[i] { 1.0 } else { 0.0 }) / b as f64);
        }
    }
    (loss / b as f64, up)
}

proptest! {
    #[test]
    fn softmax_sums_to_one_and_ignores_shifts(
        z in prop::collection::vec(-700.0f64..700.0, 1..40),
        c in -1e3f64..1e3,
    ) {
        let p = softmax(&z).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = z.iter().map(|v| v + c).collect();
        let q = softmax(&shifted).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn step_probability_is_increasing(a in -30.0f64..20.0, d in 1e-3f64..10.0) {
        prop_assert!(step_probability(a).unwrap() < step_probability(a + d).unwrap());
    }

    #[test]
    fn activations_are_bounded(act in activation(), u in -1e6f64..1e6) {
        let a = act.apply(u);
        match act {
            ActivationKind::Tanh => prop_assert!(a.abs() <= 1.0),
            ActivationKind::Sigmoid => prop_assert!((0.0..=1.0).contains(&a)),
            ActivationKind::ClippedRelu { clip } => prop_assert!((0.0..=clip).contains(&a)),
            ActivationKind::Relu => prop_assert!(a >= 0.0),
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point(seed in any::<u64>(), steps in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = NetworkParams::init(&[4, 6, 3], ActivationKind::Tanh, OutputHead::Softmax, true, &mut rng).unwrap();
        let before = net.clone();
        let mut opt = RmsPropState::new(&net, 1e-2);
        let zero = Gradients::zeros_like(&net);
        for _ in 0..steps {
            opt.step(&mut net, &zero).unwrap();
        }
        prop_assert_eq!(net, before);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradients_match_finite_differences_under_a_fixed_dropout_mask(
        act in activation(),
        seed in any::<u64>(),
        rate in 0.0f64..0.5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = NetworkParams::init(&[5, 7, 6, 4], act, OutputHead::Softmax, false, &mut rng).unwrap();
        // Nonzero biases keep ReLU pre-activations off the kink when a whole
        // layer below is inactive.
        for l in &mut net.layers {
            l.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
        }
        let x = Matrix::from_vec(3, 5, (0..15).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect());
        let labels = [0usize, 3, 1];
        let mask = DropoutMasks::sample(&net, 3, rate, &mut rng);
        let loss = |p: &NetworkParams| xent(&p.forward(&x, Mode::Train, Some(&mask)).unwrap().into_output(), &labels).0;
        let cache = net.forward(&x, Mode::Train, Some(&mask)).unwrap();
        prop_assume!(kink_margin(&net, &cache) > 1e-3);
        let (_, up) = xent(cache.output(), &labels);
        let g = net.backward(&cache, &up, 0.0).unwrap();
        let err = gradient_check(&net, loss, &g, 1e-5);
        prop_assert!(err < 1e-6, "{err}");
    }
}
