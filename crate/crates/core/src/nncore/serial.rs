//! Versioned JSON form of [`NetworkParams`].
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so a save/load cycle reproduces every parameter bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::activation::ActivationKind;
use super::network::{BatchNormState, DenseLayer, NetworkParams, OutputHead};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct NetworkWire {
    format_version: u32,
    activation: ActivationKind,
    output_head: OutputHead,
    layers: Vec<DenseLayer>,
    #[serde(default)]
    batchnorm: Option<BatchNormState>,
}

impl From<NetworkParams> for NetworkWire {
    fn from(p: NetworkParams) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            activation: p.hidden_activation,
            output_head: p.output_head,
            layers: p.layers,
            batchnorm: p.batchnorm,
        }
    }
}

impl TryFrom<NetworkWire> for NetworkParams {
    type Error = Error;

    fn try_from(w: NetworkWire) -> Result<Self> {
        if w.format_version != FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported network format_version {}",
                w.format_version
            )));
        }
        let p = NetworkParams {
            layers: w.layers,
            hidden_activation: w.activation,
            output_head: w.output_head,
            batchnorm: w.batchnorm,
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn to_json(params: &NetworkParams) -> Result<String> {
    Ok(serde_json::to_string(params)?)
}

pub fn from_json(s: &str) -> Result<NetworkParams> {
    Ok(serde_json::from_str(s)?)
}
