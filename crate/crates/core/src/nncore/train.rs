//! Minibatch RMSProp training loop shared by every model family.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::activation::ActivationKind;
use super::network::{Gradients, NetworkParams};
use super::optim::RmsPropState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    /// Learning-rate multiplier applied after an epoch whose training loss rose.
    pub lr_decay_factor: f64,
    pub l2_lambda: f64,
    pub dropout_rate: f64,
    pub seed: u64,
    pub neurons_per_hidden_layer: usize,
    pub hidden_layers: usize,
    pub activation: ActivationKind,
    pub batchnorm: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 75,
            batch_size: 256,
            initial_lr: 1e-3,
            lr_decay_factor: 0.5,
            l2_lambda: 1e-6,
            dropout_rate: 0.1,
            seed: 0,
            neurons_per_hidden_layer: 250,
            hidden_layers: 3,
            activation: ActivationKind::Tanh,
            batchnorm: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return bad("initial_lr must be positive");
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor < 1.0) {
            return bad("lr_decay_factor must lie in (0, 1)");
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return bad("l2_lambda must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout_rate must lie in [0, 1)");
        }
        if self.hidden_layers == 0 {
            return bad("hidden_layers must be at least 1");
        }
        if self.neurons_per_hidden_layer == 0 {
            return bad("neurons_per_hidden_layer must be at least 1");
        }
        self.activation.validate()
    }

    /// Layer widths `[input, hidden.., output]`.
    pub fn dims(&self, input: usize, output: usize) -> Vec<usize> {
        let mut d = vec![input];
        d.extend(std::iter::repeat_n(self.neurons_per_hidden_layer, self.hidden_layers));
        d.push(output);
        d
    }
}

/// Randomness and regularization handed to [`Objective::train_batch`].
pub struct BatchContext<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub dropout_rate: f64,
    pub l2_lambda: f64,
}

/// A loss over a fixed dataset that owns the mapping from samples to network inputs.
pub trait Objective {
    /// Mean per-sample loss over `batch` in train mode and the gradient of
    /// `loss + l2 * ||theta||^2` for each network. Implementations fold the batch
    /// statistics into the running batch-norm averages.
    fn train_batch(
        &self,
        nets: &mut [NetworkParams],
        batch: &[usize],
        ctx: &mut BatchContext<'_>,
    ) -> Result<(f64, Vec<Gradients>)>;

    /// Mean per-sample loss over `idx` in infer mode.
    fn eval_loss(&self, nets: &[NetworkParams], idx: &[usize]) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Snapshot with the lowest validation loss.
    pub nets: Vec<NetworkParams>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Train `nets` on `train` with early-stopping selection on `val`.
///
/// Each epoch reshuffles the training indices; the learning rate is multiplied
/// by `lr_decay_factor` after any epoch whose mean training loss exceeded the
/// previous one. `lr` in the history is the rate used during that epoch.
pub fn fit<O: Objective>(
    objective: &O,
    mut nets: Vec<NetworkParams>,
    train: &[usize],
    val: &[usize],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<FitResult> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::arg("train_model", "training and validation sets must be nonempty"));
    }
    let mut opt: Vec<RmsPropState> = nets.iter().map(|n| RmsPropState::new(n, cfg.initial_lr)).collect();
    let mut order = train.to_vec();
    let mut lr = cfg.initial_lr;
    let mut prev_train = f64::INFINITY;
    let mut best: Option<(f64, usize, Vec<NetworkParams>)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut last_finite = nets.clone();

    for epoch in 1..=cfg.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut ctx = BatchContext {
                rng,
                dropout_rate: cfg.dropout_rate,
                l2_lambda: cfg.l2_lambda,
            };
            let (loss, grads) = objective.train_batch(&mut nets, batch, &mut ctx)?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, last_finite });
            }
            total += loss * batch.len() as f64;
            for ((net, g), o) in nets.iter_mut().zip(&grads).zip(&mut opt) {
                o.learning_rate = lr;
                o.step(net, g)?;
            }
        }
        let train_loss = total / order.len() as f64;
        let val_loss = objective.eval_loss(&nets, val)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Diverged { epoch, last_finite });
        }
        history.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            lr,
        });
        if best.as_ref().is_none_or(|b| val_loss < b.0) {
            best = Some((val_loss, epoch, nets.clone()));
        }
        if train_loss > prev_train {
            lr *= cfg.lr_decay_factor;
        }
        prev_train = train_loss;
        last_finite.clone_from(&nets);
    }
    let (_, best_epoch, nets) = best.expect("at least one epoch");
    Ok(FitResult {
        nets,
        history,
        best_epoch,
    })
}
