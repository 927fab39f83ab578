use serde::{Deserialize, Serialize};

use crate::data::{CaseMode, LabeledSample, NormalizationStats};
use crate::error::{Error, Result};
use crate::nncore::{EpochRecord, TrainConfig};
use crate::seed::rng_for;

use super::grid::Grid;
use super::inputs::DEFAULT_LOCAL_WINDOW;
use super::naive::NaiveEmpiricalModel;
use super::samples::SampleView;
use super::softmax_net::train_softmax;
use super::spatial::train_spatial;
use super::{Family, Model};

/// Training settings shared by all families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub train: TrainConfig,
    /// Hidden width of the six spatial networks.
    pub spatial_neurons: usize,
    pub local_window: usize,
    /// Add-one smoothing for the naive model.
    pub smoothing: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            spatial_neurons: 50,
            local_window: DEFAULT_LOCAL_WINDOW,
            smoothing: true,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.spatial_neurons == 0 || self.local_window == 0 {
            return Err(Error::InvalidConfig("spatial_neurons and local_window must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: Model,
    pub history: Vec<EpochRecord>,
    /// One-based epoch of the returned parameters; 0 for the naive model.
    pub best_epoch: usize,
}

fn in_grid(grid: &Grid, s: &LabeledSample) -> bool {
    grid.contains(s.label.y1) && grid.contains(s.label.y2)
}

/// Fit `family` on `train`, selecting the epoch with the lowest loss on `val`.
///
/// Normalization statistics come from the training states. Samples with a
/// move beyond the grid are left out of the fit.
pub fn train_model(
    family: Family,
    train: &[LabeledSample],
    val: &[LabeledSample],
    case: CaseMode,
    cfg: &ModelConfig,
) -> Result<TrainedModel> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::arg("train_model", "training and validation sets must be nonempty"));
    }
    let stats = NormalizationStats::fit(train.iter().map(|s| &s.state))?;
    if family == Family::Naive {
        let mut m = NaiveEmpiricalModel::fit(train.iter().map(|s| &s.label), case, cfg.smoothing)?;
        m.stats = Some(stats);
        return Ok(TrainedModel {
            model: Model::Naive(m),
            history: Vec::new(),
            best_epoch: 0,
        });
    }
    let grid = Grid::truncated();
    let view = SampleView { train, val };
    let n = train.len();
    let train_idx: Vec<usize> = (0..n).filter(|&i| in_grid(&grid, &train[i])).collect();
    let val_idx: Vec<usize> = (0..val.len()).filter(|&i| in_grid(&grid, &val[i])).map(|i| i + n).collect();
    let mut rng = rng_for(cfg.train.seed, &format!("train/{family}"));
    let (model, fit) = match family {
        Family::Logistic | Family::Standard => {
            let (m, fit) = train_softmax(family, case, view, &train_idx, &val_idx, stats, &cfg.train, &mut rng)?;
            let model = if family == Family::Logistic { Model::Logistic(m) } else { Model::Standard(m) };
            (model, fit)
        }
        Family::Spatial => {
            let spatial_cfg = TrainConfig {
                neurons_per_hidden_layer: cfg.spatial_neurons,
                ..cfg.train.clone()
            };
            let (m, fit) =
                train_spatial(case, view, &train_idx, &val_idx, stats, cfg.local_window, &spatial_cfg, &mut rng)?;
            (Model::Spatial(m), fit)
        }
        Family::Naive => unreachable!(),
    };
    Ok(TrainedModel {
        model,
        history: fit.history,
        best_epoch: fit.best_epoch,
    })
}
