//! The four model families behind one interface.

pub mod bundle;
pub mod dist;
pub mod grid;
pub mod inputs;
pub mod joint_input;
pub mod naive;
pub(crate) mod objective;
mod samples;
pub mod softmax_net;
pub mod spatial;
pub mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use bundle::{load_model, save_model, ModelBundle};
pub use dist::{
    case2_support_restrict, joint_loglik, joint_pmf, predict_topk, tail_conditional, ComponentModel, ComponentPmf,
    ConditionalPmf, PredictiveDistribution, Sampled, TailEvent,
};
pub use grid::{Grid, GRID_HALF, GRID_SIZE};
pub use inputs::{local_dim, local_features, y1_encoding, SampleFeatures, DEFAULT_LOCAL_WINDOW};
pub use joint_input::joint_input_loglik;
pub use naive::{NaiveCounts, NaiveEmpiricalModel};
pub use softmax_net::{GridSoftmaxModel, LogisticModel, StandardNetModel};
pub use spatial::{EvalCount, SpatialModel, SAMPLE_CAP};
pub use train::{train_model, ModelConfig, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Naive,
    Logistic,
    Standard,
    Spatial,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Naive, Family::Logistic, Family::Standard, Family::Spatial];

    pub fn name(self) -> &'static str {
        match self {
            Family::Naive => "naive",
            Family::Logistic => "logistic",
            Family::Standard => "standard",
            Family::Spatial => "spatial",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown model family {s:?}")))
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Naive(NaiveEmpiricalModel),
    Logistic(GridSoftmaxModel),
    Standard(GridSoftmaxModel),
    Spatial(SpatialModel),
}

impl Model {
    pub fn family(&self) -> Family {
        match self {
            Model::Naive(_) => Family::Naive,
            Model::Logistic(_) => Family::Logistic,
            Model::Standard(_) => Family::Standard,
            Model::Spatial(_) => Family::Spatial,
        }
    }

    pub fn as_dyn(&self) -> &dyn ComponentModel {
        match self {
            Model::Naive(m) => m,
            Model::Logistic(m) | Model::Standard(m) => m,
            Model::Spatial(m) => m,
        }
    }
}
