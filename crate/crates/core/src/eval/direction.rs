//! Direction of the next best-ask move: a closed-form baseline from the
//! best-level sizes against fitted logistic and network classifiers.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{LabeledSample, NormalizationStats};
use crate::error::{Error, Result};
use crate::models::SampleFeatures;
use crate::nncore::{log_step_probability, ActivationKind, NetworkParams, OutputHead, TrainConfig};
use crate::seed::rng_for;

use super::binary::{binary_loss, fit_binary};

/// Probability that the best ask moves up next, for best-level sizes `ask`
/// and `bid` whose increments have correlation `rho`.
pub fn theoretical_pup(ask: f64, bid: f64, rho: f64) -> Result<f64> {
    if !(rho > -1.0 && rho < 1.0) {
        return Err(Error::arg("theoretical_pup", format!("rho must lie in (-1, 1), got {rho}")));
    }
    if !(ask >= 0.0 && bid >= 0.0 && ask + bid > 0.0) {
        return Err(Error::arg("theoretical_pup", format!("invalid sizes ({ask}, {bid})")));
    }
    let s = ((1.0 + rho) / (1.0 - rho)).sqrt();
    let r = (ask - bid) / (ask + bid);
    Ok((0.5 - (s * r).atan() / (2.0 * s.atan())).clamp(0.0, 1.0))
}

/// Pearson correlation of the first differences of two series.
pub fn increment_correlation(a: &[f64], b: &[f64]) -> f64 {
    let da: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
    let db: Vec<f64> = b.windows(2).map(|w| w[1] - w[0]).collect();
    let n = da.len().min(db.len()) as f64;
    if n < 2.0 {
        return 0.0;
    }
    let ma = da.iter().sum::<f64>() / n;
    let mb = db.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in da.iter().zip(&db) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionComparison {
    pub n_train: usize,
    pub n_test: usize,
    pub rho: f64,
    /// Binary cross-entropy of each predictor on the test moves, in nats.
    pub logistic: f64,
    pub standard: f64,
    pub theoretical: f64,
}

/// Binary cross-entropy of `p` for an outcome `up`, with `p` clipped away
/// from 0 and 1 by `1e-12`.
fn bce(p: f64, up: bool) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    -if up { p.ln() } else { (1.0 - p).ln() }
}

/// Fit both classifiers on the training moves and score all three predictors
/// on the test moves. Only samples where the best ask moved are used; `rho`
/// comes from the full training stream.
pub fn direction_comparison(
    train: &[LabeledSample],
    test: &[LabeledSample],
    cfg: &TrainConfig,
) -> Result<DirectionComparison> {
    let moved = |s: &&LabeledSample| s.label.y1 != 0;
    let tr: Vec<&LabeledSample> = train.iter().filter(moved).collect();
    let te: Vec<&LabeledSample> = test.iter().filter(moved).collect();
    if tr.len() < 2 || te.is_empty() {
        return Err(Error::arg("direction_comparison", "too few best-ask moves"));
    }
    let best = |f: fn(&LabeledSample) -> u64| train.iter().map(|s| f(s) as f64).collect::<Vec<_>>();
    let rho = increment_correlation(&best(|s| s.state.ask_sizes[0]), &best(|s| s.state.bid_sizes[0]))
        .clamp(-0.999_999, 0.999_999);
    let stats = NormalizationStats::fit(tr.iter().map(|s| &s.state))?;
    let feats = |s: &LabeledSample| SampleFeatures::new(&s.state, &stats);

    let mut rng = rng_for(cfg.seed, "direction");
    let mut idx: Vec<usize> = (0..tr.len()).collect();
    idx.shuffle(&mut rng);
    let n_val = ((0.05 * idx.len() as f64).floor() as usize).max(1);
    let val = idx.split_off(idx.len() - n_val);
    let up = |s: &LabeledSample| if s.label.y1 > 0 { 1.0 } else { 0.0 };

    let logistic_row = |s: &LabeledSample, out: &mut Vec<f64>| {
        let f = feats(s);
        out.extend_from_slice(&f.x);
        out.extend_from_slice(&f.imbalance);
        up(s)
    };
    let standard_row = |s: &LabeledSample, out: &mut Vec<f64>| {
        out.extend_from_slice(&feats(s).x);
        up(s)
    };
    let d_log = crate::data::FEATURE_DIM + crate::data::LEVELS;
    let d_std = crate::data::FEATURE_DIM;
    let lin_cfg = TrainConfig {
        dropout_rate: 0.0,
        batchnorm: false,
        ..cfg.clone()
    };
    let lin = NetworkParams::init(&[d_log, 1], ActivationKind::Tanh, OutputHead::ScalarLogit, false, &mut rng)?;
    let (lin, _) = fit_binary(lin, |i, o| logistic_row(tr[i], o), &idx, &val, &lin_cfg, &mut rng)?;
    let net = NetworkParams::init(&cfg.dims(d_std, 1), cfg.activation, OutputHead::ScalarLogit, cfg.batchnorm, &mut rng)?;
    let (net, _) = fit_binary(net, |i, o| standard_row(tr[i], o), &idx, &val, cfg, &mut rng)?;

    let test_idx: Vec<usize> = (0..te.len()).collect();
    let logistic = binary_loss(&lin, |i, o| logistic_row(te[i], o), &test_idx)?;
    let standard = binary_loss(&net, |i, o| standard_row(te[i], o), &test_idx)?;
    let mut theoretical = 0.0;
    for s in &te {
        let (a, b) = (s.state.ask_sizes[0] as f64, s.state.bid_sizes[0] as f64);
        let p = if a + b > 0.0 { theoretical_pup(a, b, rho)? } else { 0.5 };
        theoretical += bce(p, s.label.y1 > 0);
    }
    Ok(DirectionComparison {
        n_train: tr.len(),
        n_test: te.len(),
        rho,
        logistic,
        standard,
        theoretical: theoretical / te.len() as f64,
    })
}

/// Binary cross-entropy of a logit against an outcome, for callers scoring
/// their own predictors.
pub fn logit_bce(f: f64, up: bool) -> f64 {
    -if up { log_step_probability(f) } else { log_step_probability(-f) }
}
