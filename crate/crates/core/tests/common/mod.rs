#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lobspatial::data::synth::draw_state;
use lobspatial::data::{CaseMode, JointMove, LOBState, NormalizationStats, SyntheticGenConfig};
use lobspatial::models::{Family, GridSoftmaxModel, Model, NaiveEmpiricalModel, SpatialModel, DEFAULT_LOCAL_WINDOW};
use lobspatial::nncore::TrainConfig;

pub fn states(n: usize, seed: u64) -> Vec<LOBState> {
    let cfg = SyntheticGenConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| draw_state(&cfg, i as i64, &mut rng)).collect()
}

pub fn stats() -> NormalizationStats {
    NormalizationStats::fit(&states(300, 1)).unwrap()
}

/// Small networks so that property tests stay fast.
pub fn small_train_config() -> TrainConfig {
    TrainConfig {
        neurons_per_hidden_layer: 12,
        hidden_layers: 2,
        batchnorm: false,
        ..TrainConfig::default()
    }
}

fn random_label(case: CaseMode, rng: &mut ChaCha8Rng) -> JointMove {
    loop {
        let m = JointMove::new(rng.random_range(-8..=8), rng.random_range(-8..=8));
        // Next-move labels have exactly one nonzero component.
        if case == CaseMode::FixedHorizon || (m.y1 == 0) != (m.y2 == 0) {
            return m;
        }
    }
}

/// A randomly initialized (or randomly counted) model of `family`.
pub fn random_model(family: Family, case: CaseMode, seed: u64) -> Model {
    random_model_with(family, case, seed, &small_train_config())
}

pub fn random_model_with(family: Family, case: CaseMode, seed: u64, cfg: &TrainConfig) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match family {
        Family::Naive => {
            let labels: Vec<JointMove> = (0..200).map(|_| random_label(case, &mut rng)).collect();
            let mut m = NaiveEmpiricalModel::fit(&labels, case, true).unwrap();
            m.stats = Some(stats());
            Model::Naive(m)
        }
        Family::Logistic | Family::Standard => {
            let m = GridSoftmaxModel::init(family, case, stats(), cfg, &mut rng).unwrap();
            if family == Family::Logistic {
                Model::Logistic(m)
            } else {
                Model::Standard(m)
            }
        }
        Family::Spatial => Model::Spatial(SpatialModel::init(case, stats(), DEFAULT_LOCAL_WINDOW, cfg, &mut rng).unwrap()),
    }
}

pub fn random_label_in(case: CaseMode, seed: u64) -> JointMove {
    random_label(case, &mut ChaCha8Rng::seed_from_u64(seed))
}
