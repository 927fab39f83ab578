//! JSON envelope for fitted models.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{CaseMode, NormalizationStats};
use crate::error::{Error, Result};
use crate::nncore::NetworkParams;

use super::grid::Grid;
use super::naive::{NaiveCounts, NaiveEmpiricalModel};
use super::softmax_net::GridSoftmaxModel;
use super::spatial::SpatialModel;
use super::{Family, Model};

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBundle {
    pub format_version: u32,
    pub family: Family,
    pub grid: Grid,
    pub case_mode: CaseMode,
    pub components: BTreeMap<String, NetworkParams>,
    pub normalization_stats: Option<NormalizationStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<NaiveCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_window: Option<usize>,
}

impl From<&Model> for ModelBundle {
    fn from(model: &Model) -> Self {
        let mut b = ModelBundle {
            format_version: BUNDLE_FORMAT_VERSION,
            family: model.family(),
            grid: model.as_dyn().grid(),
            case_mode: model.as_dyn().case_mode(),
            components: BTreeMap::new(),
            normalization_stats: None,
            counts: None,
            smoothing: None,
            local_window: None,
        };
        match model {
            Model::Naive(m) => {
                b.normalization_stats = m.stats.clone();
                b.counts = Some(m.counts.clone());
                b.smoothing = Some(m.smoothing);
            }
            Model::Logistic(m) | Model::Standard(m) => {
                b.normalization_stats = Some(m.stats.clone());
                b.components.insert("net1".into(), m.net1.clone());
                b.components.insert("net2".into(), m.net2.clone());
            }
            Model::Spatial(m) => {
                b.normalization_stats = Some(m.stats.clone());
                b.local_window = Some(m.local_window);
                for (name, net) in SpatialModel::NET_NAMES.into_iter().zip(m.nets()) {
                    b.components.insert(name.into(), net.clone());
                }
            }
        }
        b
    }
}

impl TryFrom<ModelBundle> for Model {
    type Error = Error;

    fn try_from(mut b: ModelBundle) -> Result<Self> {
        if b.format_version != BUNDLE_FORMAT_VERSION {
            return Err(Error::Unsupported {
                op: "load_model",
                msg: format!("bundle format version {}", b.format_version),
            });
        }
        b.grid.validate()?;
        let mut take = |name: &str| {
            b.components
                .remove(name)
                .ok_or_else(|| Error::InvalidConfig(format!("{} bundle lacks component {name:?}", b.family)))
        };
        let need_stats = |s: Option<NormalizationStats>| {
            s.ok_or_else(|| Error::InvalidConfig("bundle lacks normalization_stats".into()))
        };
        let model = match b.family {
            Family::Naive => {
                let counts = b.counts.ok_or_else(|| Error::InvalidConfig("naive bundle lacks counts".into()))?;
                let n = b.grid.size();
                if counts.y1.len() != n || counts.joint.len() != n * n {
                    return Err(Error::InvalidConfig("naive counts do not match the grid".into()));
                }
                Model::Naive(NaiveEmpiricalModel {
                    grid: b.grid,
                    case: b.case_mode,
                    counts,
                    smoothing: b.smoothing.unwrap_or(false),
                    stats: b.normalization_stats,
                })
            }
            Family::Logistic | Family::Standard => {
                let m = GridSoftmaxModel {
                    family: b.family,
                    grid: b.grid,
                    case: b.case_mode,
                    net1: take("net1")?,
                    net2: take("net2")?,
                    stats: need_stats(b.normalization_stats)?,
                };
                m.validate()?;
                if b.family == Family::Logistic {
                    Model::Logistic(m)
                } else {
                    Model::Standard(m)
                }
            }
            Family::Spatial => {
                let m = SpatialModel {
                    grid: b.grid,
                    case: b.case_mode,
                    local_window: b
                        .local_window
                        .ok_or_else(|| Error::InvalidConfig("spatial bundle lacks local_window".into()))?,
                    h1: take("h1")?,
                    f1_plus: take("f1_plus")?,
                    f1_minus: take("f1_minus")?,
                    h2: take("h2")?,
                    f2_plus: take("f2_plus")?,
                    f2_minus: take("f2_minus")?,
                    stats: need_stats(b.normalization_stats)?,
                };
                m.validate()?;
                Model::Spatial(m)
            }
        };
        Ok(model)
    }
}

pub fn to_json(model: &Model) -> Result<String> {
    Ok(serde_json::to_string(&ModelBundle::from(model))?)
}

pub fn from_json(s: &str) -> Result<Model> {
    Model::try_from(serde_json::from_str::<ModelBundle>(s)?)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let mut s = to_json(model)?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&s)
}
