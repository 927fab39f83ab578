//! Local-structure regression: a pooled logistic model of whether an upward
//! best-ask move stops at level `y`, given the sizes in a window around `y`.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{featureize, ladder_value, Direction, LabeledSample, NormalizationStats};
use crate::error::{Error, Result};
use crate::nncore::{ActivationKind, NetworkParams, OutputHead, TrainConfig};
use crate::seed::rng_for;

use super::binary::fit_binary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffRatioConfig {
    /// Window half-width.
    pub k: usize,
    /// Largest conditioning level pooled into the regression.
    pub y_max: i64,
    pub p_values: Vec<usize>,
    pub val_fraction: f64,
    pub train: TrainConfig,
}

impl Default for CoeffRatioConfig {
    fn default() -> Self {
        Self {
            k: 10,
            y_max: 20,
            p_values: vec![0, 1],
            val_fraction: 0.1,
            train: TrainConfig {
                epochs: 20,
                batch_size: 128,
                initial_lr: 1e-2,
                l2_lambda: 0.0,
                dropout_rate: 0.0,
                batchnorm: false,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub p: usize,
    /// `None` when the denominator is not positive.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRatioResult {
    pub run: usize,
    pub n_rows: usize,
    /// Coefficients on offsets `-k..=k` around the candidate level.
    pub theta: Vec<f64>,
    pub intercept: f64,
    pub ratios: Vec<RatioEntry>,
}

impl CoeffRatioResult {
    pub fn ratio(&self, p: usize) -> Option<f64> {
        self.ratios.iter().find(|r| r.p == p).and_then(|r| r.ratio)
    }

    pub fn degenerate(&self) -> bool {
        self.ratios.iter().any(|r| r.ratio.is_none())
    }

    pub fn center(&self) -> f64 {
        self.theta[self.theta.len() / 2]
    }
}

/// `max(theta within p of the center) / max(|theta| elsewhere)`; `None` if the
/// denominator is not positive.
pub fn coefficient_ratio(theta: &[f64], p: usize) -> Option<f64> {
    let c = theta.len() / 2;
    let near = (c.saturating_sub(p))..=(c + p).min(theta.len() - 1);
    let num = theta[near.clone()].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let den = theta
        .iter()
        .enumerate()
        .filter(|(i, _)| !near.contains(i))
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    (den > 0.0).then(|| num / den)
}

/// Pooled rows `(window at y, 1{Y = y})` for every upward move and every
/// `y = 1..=min(Y, y_max)`.
pub fn pooled_rows(samples: &[LabeledSample], k: usize, y_max: i64) -> Result<(Vec<f64>, Vec<f64>)> {
    let stats = NormalizationStats::fit(samples.iter().map(|s| &s.state))?;
    let (mut rows, mut targets) = (Vec::new(), Vec::new());
    let k = k as i64;
    for s in samples.iter().filter(|s| s.label.y1 > 0) {
        let f = featureize(&s.state, &stats);
        let spread = s.state.spread();
        for y in 1..=s.label.y1.min(y_max) {
            for off in (y - k)..=(y + k) {
                rows.push(ladder_value(&f, spread, Direction::Up, off));
            }
            targets.push(if s.label.y1 == y { 1.0 } else { 0.0 });
        }
    }
    Ok((rows, targets))
}

/// Fit the pooled regression on one dataset.
pub fn coeff_ratio_fit(samples: &[LabeledSample], cfg: &CoeffRatioConfig, run: usize) -> Result<CoeffRatioResult> {
    let (rows, targets) = pooled_rows(samples, cfg.k, cfg.y_max)?;
    let dim = 2 * cfg.k + 1;
    if targets.iter().filter(|&&t| t == 0.0).count() == 0 {
        return Err(Error::arg("coeff_ratio_study", "no upward moves of two or more levels"));
    }
    let mut rng = rng_for(cfg.train.seed, &format!("coeffratio/{run}"));
    let mut idx: Vec<usize> = (0..targets.len()).collect();
    idx.shuffle(&mut rng);
    let n_val = ((cfg.val_fraction * idx.len() as f64).floor() as usize).max(1);
    let val = idx.split_off(idx.len() - n_val);
    let net = NetworkParams::init(&[dim, 1], ActivationKind::Tanh, OutputHead::ScalarLogit, false, &mut rng)?;
    let row = |i: usize, out: &mut Vec<f64>| {
        out.extend_from_slice(&rows[i * dim..(i + 1) * dim]);
        targets[i]
    };
    let (net, _) = fit_binary(net, row, &idx, &val, &cfg.train, &mut rng)?;
    let theta = net.layers[0].weights.clone();
    let ratios = cfg
        .p_values
        .iter()
        .map(|&p| RatioEntry {
            p,
            ratio: coefficient_ratio(&theta, p),
        })
        .collect();
    Ok(CoeffRatioResult {
        run,
        n_rows: targets.len(),
        theta,
        intercept: net.layers[0].bias[0],
        ratios,
    })
}

/// One regression per dataset.
pub fn coeff_ratio_study(runs: &[Vec<LabeledSample>], cfg: &CoeffRatioConfig) -> Result<Vec<CoeffRatioResult>> {
    runs.iter().enumerate().map(|(r, s)| coeff_ratio_fit(s, cfg, r)).collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
