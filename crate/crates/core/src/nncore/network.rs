//! Dense feedforward network `a_l = g(W_l a_{l-1} + b_l)` with optional batch
//! normalization of every hidden pre-activation and inverted dropout on hidden
//! outputs.
//!
//! All batched entry points take row-major `batch x dim` matrices. The output
//! layer is linear: [`ForwardCache::output`] is the pre-head vector and the
//! softmax or logistic head is applied by the caller's loss.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::activation::ActivationKind;
use super::matrix::{gemm_a_b, gemm_a_bt, gemm_at_b, Matrix};
use super::serial::NetworkWire;

pub const DEFAULT_BN_MOMENTUM: f64 = 0.99;
pub const DEFAULT_BN_EPSILON: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    Softmax,
    ScalarLogit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Affine map `rows x cols`, weights row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
        }
    }

    #[inline]
    pub fn weight(&self, r: usize, c: usize) -> f64 {
        self.weights[r * self.cols + c]
    }

    fn check(&self, idx: usize) -> Result<()> {
        if self.weights.len() != self.rows * self.cols {
            return Err(Error::DimensionMismatch {
                layer: idx,
                expected: self.rows * self.cols,
                got: self.weights.len(),
            });
        }
        if self.bias.len() != self.rows {
            return Err(Error::DimensionMismatch {
                layer: idx,
                expected: self.rows,
                got: self.bias.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormLayer {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNormLayer {
    fn identity(dim: usize) -> Self {
        Self {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
        }
    }
}

/// Per-hidden-layer normalization parameters and running statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormState {
    pub layers: Vec<BatchNormLayer>,
    pub momentum: f64,
    pub epsilon: f64,
}

/// Parameters of one feedforward network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkWire", into = "NetworkWire")]
pub struct NetworkParams {
    pub layers: Vec<DenseLayer>,
    pub hidden_activation: ActivationKind,
    pub output_head: OutputHead,
    pub batchnorm: Option<BatchNormState>,
}

/// Inverted-dropout masks, one `batch x d_l` matrix per hidden layer. Entries
/// are `0` or `1 / keep_probability`.
#[derive(Debug, Clone)]
pub struct DropoutMasks {
    pub layers: Vec<Matrix>,
}

impl DropoutMasks {
    pub fn sample<R: Rng + ?Sized>(params: &NetworkParams, batch: usize, rate: f64, rng: &mut R) -> Self {
        let keep = 1.0 - rate;
        let scale = 1.0 / keep;
        let layers = params.layers[..params.layers.len() - 1]
            .iter()
            .map(|l| {
                let mut m = Matrix::zeros(batch, l.rows);
                for v in m.as_mut_slice() {
                    if rng.random::<f64>() < keep {
                        *v = scale;
                    }
                }
                m
            })
            .collect();
        Self { layers }
    }
}

#[derive(Debug, Clone)]
struct HiddenCache {
    /// Normalized pre-activation, present when batch norm is on.
    zhat: Option<Matrix>,
    /// Input to the nonlinearity.
    u: Matrix,
    /// Output after nonlinearity and dropout; input of the next layer.
    a: Matrix,
    inv_std: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
    mask: Option<Matrix>,
}

/// Everything [`NetworkParams::backward`] needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    mode: Mode,
    input: Matrix,
    hidden: Vec<HiddenCache>,
    output: Matrix,
}

impl ForwardCache {
    /// Pre-head output, `batch x d_L`.
    pub fn output(&self) -> &Matrix {
        &self.output
    }

    /// Hidden activations of layer `l` (after dropout).
    pub fn hidden_activation(&self, l: usize) -> &Matrix {
        &self.hidden[l].a
    }

    /// Input to the nonlinearity of hidden layer `l`.
    pub fn pre_activation(&self, l: usize) -> &Matrix {
        &self.hidden[l].u
    }

    pub fn hidden_layers(&self) -> usize {
        self.hidden.len()
    }

    pub fn into_output(self) -> Matrix {
        self.output
    }
}

/// Gradients shaped like the parameters they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<DenseLayer>,
    /// `(d gamma, d beta)` per hidden layer when batch norm is on.
    pub batchnorm: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            layers: params.layers.iter().map(|l| DenseLayer::zeros(l.rows, l.cols)).collect(),
            batchnorm: params
                .batchnorm
                .as_ref()
                .map(|bn| {
                    bn.layers
                        .iter()
                        .map(|l| (vec![0.0; l.gamma.len()], vec![0.0; l.gamma.len()]))
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    /// Slices in the same order as [`NetworkParams::param_slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in &self.layers {
            out.push(&l.weights);
            out.push(&l.bias);
        }
        for (g, b) in &self.batchnorm {
            out.push(g);
            out.push(b);
        }
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.weights);
            out.push(&mut l.bias);
        }
        for (g, b) in &mut self.batchnorm {
            out.push(g);
            out.push(b);
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for sl in self.slices_mut() {
            sl.iter_mut().for_each(|v| *v *= s);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

impl NetworkParams {
    /// Randomly initialized network with layer widths `dims = [d_0, ..., d_L]`.
    ///
    /// Weights are uniform in `+-sqrt(6 / (d_in + d_out))`, biases zero, batch-norm
    /// gains one and shifts zero.
    pub fn init<R: Rng + ?Sized>(
        dims: &[usize],
        hidden_activation: ActivationKind,
        output_head: OutputHead,
        batchnorm: bool,
        rng: &mut R,
    ) -> Result<Self> {
        hidden_activation.validate()?;
        if dims.len() < 2 {
            return Err(Error::InvalidConfig("a network needs at least one layer".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidConfig(format!("zero-width layer in {dims:?}")));
        }
        if output_head == OutputHead::ScalarLogit && dims[dims.len() - 1] != 1 {
            return Err(Error::InvalidConfig("scalar_logit head needs output width 1".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (cols, rows) = (w[0], w[1]);
            let limit = (6.0 / (cols + rows) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            let weights = (0..rows * cols).map(|_| dist.sample(rng)).collect();
            layers.push(DenseLayer {
                rows,
                cols,
                weights,
                bias: vec![0.0; rows],
            });
        }
        let bn = (batchnorm && layers.len() > 1).then(|| BatchNormState {
            layers: layers[..layers.len() - 1]
                .iter()
                .map(|l| BatchNormLayer::identity(l.rows))
                .collect(),
            momentum: DEFAULT_BN_MOMENTUM,
            epsilon: DEFAULT_BN_EPSILON,
        });
        Ok(Self {
            layers,
            hidden_activation,
            output_head,
            batchnorm: bn,
        })
    }

    /// Check the structural invariants (chained dimensions, head width, batch norm shapes).
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidConfig("network has no layers".into()));
        }
        self.hidden_activation.validate()?;
        for (i, l) in self.layers.iter().enumerate() {
            l.check(i)?;
            if i > 0 && l.cols != self.layers[i - 1].rows {
                return Err(Error::DimensionMismatch {
                    layer: i,
                    expected: self.layers[i - 1].rows,
                    got: l.cols,
                });
            }
        }
        if self.output_head == OutputHead::ScalarLogit && self.output_dim() != 1 {
            return Err(Error::InvalidConfig("scalar_logit head needs output width 1".into()));
        }
        if let Some(bn) = &self.batchnorm {
            if bn.layers.len() != self.layers.len() - 1 {
                return Err(Error::InvalidConfig(format!(
                    "batch norm has {} layers, network has {} hidden layers",
                    bn.layers.len(),
                    self.layers.len() - 1
                )));
            }
            if !(bn.epsilon > 0.0) || !(bn.momentum > 0.0 && bn.momentum < 1.0) {
                return Err(Error::InvalidConfig("batch norm epsilon/momentum out of range".into()));
            }
            for (i, b) in bn.layers.iter().enumerate() {
                let d = self.layers[i].rows;
                if [b.gamma.len(), b.beta.len(), b.running_mean.len(), b.running_var.len()]
                    .iter()
                    .any(|&n| n != d)
                {
                    return Err(Error::DimensionMismatch {
                        layer: i,
                        expected: d,
                        got: b.gamma.len(),
                    });
                }
                if b.running_var.iter().any(|v| *v < 0.0) {
                    return Err(Error::InvalidConfig("negative running variance".into()));
                }
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    /// Number of layers `L` (hidden layers plus the output layer).
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn param_count(&self) -> usize {
        let dense: usize = self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
        let bn: usize = self
            .batchnorm
            .as_ref()
            .map_or(0, |b| b.layers.iter().map(|l| 2 * l.gamma.len()).sum());
        dense + bn
    }

    /// Trainable parameter slices: weights and bias per layer, then gamma and
    /// beta per batch-norm layer.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.weights);
            out.push(&mut l.bias);
        }
        if let Some(bn) = &mut self.batchnorm {
            for l in &mut bn.layers {
                out.push(&mut l.gamma);
                out.push(&mut l.beta);
            }
        }
        out
    }

    pub fn param_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in &self.layers {
            out.push(&l.weights);
            out.push(&l.bias);
        }
        if let Some(bn) = &self.batchnorm {
            for l in &bn.layers {
                out.push(&l.gamma);
                out.push(&l.beta);
            }
        }
        out
    }

    /// Sum of squared weights and biases (the L2 penalty without its factor).
    pub fn l2_norm_sq(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()))
            .map(|v| v * v)
            .sum()
    }

    /// Forward pass over a batch.
    ///
    /// In [`Mode::Train`] batch statistics normalize the hidden pre-activations;
    /// call [`NetworkParams::update_running_stats`] afterwards to fold them into
    /// the running averages. [`Mode::Infer`] uses the running statistics.
    /// `dropout` must be `None` in infer mode.
    pub fn forward(&self, input: &Matrix, mode: Mode, dropout: Option<&DropoutMasks>) -> Result<ForwardCache> {
        if input.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.input_dim(),
                got: input.cols(),
            });
        }
        if mode == Mode::Infer && dropout.is_some() {
            return Err(Error::arg("forward", "dropout masks are only valid in train mode"));
        }
        let batch = input.rows();
        let n_hidden = self.layers.len() - 1;
        if let Some(masks) = dropout {
            if masks.layers.len() != n_hidden {
                return Err(Error::arg("forward", "dropout mask count does not match hidden layers"));
            }
            for (i, m) in masks.layers.iter().enumerate() {
                if m.rows() != batch || m.cols() != self.layers[i].rows {
                    return Err(Error::DimensionMismatch {
                        layer: i,
                        expected: self.layers[i].rows,
                        got: m.cols(),
                    });
                }
            }
        }

        let mut hidden = Vec::with_capacity(n_hidden);
        let mut prev: &Matrix = input;
        for (l, layer) in self.layers[..n_hidden].iter().enumerate() {
            let mut z = affine(prev, layer);
            let (zhat, mean, var, inv_std) = match &self.batchnorm {
                Some(bn) => {
                    let bl = &bn.layers[l];
                    let (mean, var) = match mode {
                        Mode::Train => column_moments(&z),
                        Mode::Infer => (bl.running_mean.clone(), bl.running_var.clone()),
                    };
                    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + bn.epsilon).sqrt()).collect();
                    let mut zhat = z.clone();
                    for i in 0..batch {
                        let row = zhat.row_mut(i);
                        for j in 0..row.len() {
                            row[j] = (row[j] - mean[j]) * inv_std[j];
                        }
                    }
                    for i in 0..batch {
                        let (src, dst) = (zhat.row(i), z.row_mut(i));
                        for j in 0..dst.len() {
                            dst[j] = bl.gamma[j] * src[j] + bl.beta[j];
                        }
                    }
                    (Some(zhat), mean, var, inv_std)
                }
                None => (None, Vec::new(), Vec::new(), Vec::new()),
            };
            let u = z;
            let mut a = u.clone();
            let act = self.hidden_activation;
            a.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
            let mask = dropout.map(|m| m.layers[l].clone());
            if let Some(m) = &mask {
                for (v, s) in a.as_mut_slice().iter_mut().zip(m.as_slice()) {
                    *v *= s;
                }
            }
            hidden.push(HiddenCache {
                zhat,
                u,
                a,
                inv_std,
                mean,
                var,
                mask,
            });
            prev = &hidden[l].a;
        }
        let output = affine(prev, &self.layers[n_hidden]);
        Ok(ForwardCache {
            mode,
            input: input.clone(),
            hidden,
            output,
        })
    }

    /// Inference on a single input vector.
    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = Matrix::from_vec(1, x.len(), x.to_vec());
        Ok(self.forward(&m, Mode::Infer, None)?.into_output().into_vec())
    }

    /// Inference on a batch, returning only the pre-head output.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        Ok(self.forward(input, Mode::Infer, None)?.into_output())
    }

    /// Fold the batch statistics of a train-mode pass into the running averages.
    pub fn update_running_stats(&mut self, cache: &ForwardCache) {
        if cache.mode != Mode::Train {
            return;
        }
        if let Some(bn) = &mut self.batchnorm {
            let m = bn.momentum;
            for (bl, hc) in bn.layers.iter_mut().zip(&cache.hidden) {
                for j in 0..bl.running_mean.len() {
                    bl.running_mean[j] = m * bl.running_mean[j] + (1.0 - m) * hc.mean[j];
                    bl.running_var[j] = m * bl.running_var[j] + (1.0 - m) * hc.var[j];
                }
            }
        }
    }

    /// Gradients of `sum_i upstream[i] . output[i] + l2 * ||theta||^2` with respect
    /// to every weight, bias, gain and shift. `upstream` is the derivative of the
    /// caller's loss with respect to the pre-head output.
    pub fn backward(&self, cache: &ForwardCache, upstream: &Matrix, l2: f64) -> Result<Gradients> {
        let n_hidden = self.layers.len() - 1;
        if cache.hidden.len() != n_hidden || cache.input.cols() != self.input_dim() {
            return Err(Error::arg("backward", "cache was produced by a different network"));
        }
        if upstream.rows() != cache.output.rows() || upstream.cols() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                layer: n_hidden,
                expected: self.output_dim(),
                got: upstream.cols(),
            });
        }
        let batch = upstream.rows();
        let mut grads = Gradients::zeros_like(self);
        let mut delta = upstream.clone();

        for l in (0..=n_hidden).rev() {
            let layer = &self.layers[l];
            let input = if l == 0 { &cache.input } else { &cache.hidden[l - 1].a };
            {
                let g = &mut grads.layers[l];
                gemm_at_b(delta.as_slice(), batch, layer.rows, input.as_slice(), layer.cols, 0.0, &mut g.weights);
                for i in 0..batch {
                    for (b, d) in g.bias.iter_mut().zip(delta.row(i)) {
                        *b += d;
                    }
                }
            }
            if l == 0 {
                break;
            }
            // Gradient with respect to the previous hidden layer's output.
            let mut da = Matrix::zeros(batch, layer.cols);
            gemm_a_b(delta.as_slice(), batch, layer.rows, &layer.weights, layer.cols, 0.0, da.as_mut_slice());

            let hc = &cache.hidden[l - 1];
            if let Some(m) = &hc.mask {
                for (v, s) in da.as_mut_slice().iter_mut().zip(m.as_slice()) {
                    *v *= s;
                }
            }
            // Through the nonlinearity. `a` holds the post-dropout value, so
            // recompute the raw activation from `u` where the derivative needs it.
            let act = self.hidden_activation;
            for ((d, &u), _) in da.as_mut_slice().iter_mut().zip(hc.u.as_slice()).zip(0..) {
                *d *= act.derivative(u, act.apply(u));
            }
            // Through batch norm.
            if let (Some(bn), Some(zhat)) = (&self.batchnorm, &hc.zhat) {
                let bl = &bn.layers[l - 1];
                let d = bl.gamma.len();
                let (dgamma, dbeta) = &mut grads.batchnorm[l - 1];
                for i in 0..batch {
                    let (du, zh) = (da.row(i), zhat.row(i));
                    for j in 0..d {
                        dgamma[j] += du[j] * zh[j];
                        dbeta[j] += du[j];
                    }
                }
                match cache.mode {
                    Mode::Train => {
                        let m = batch as f64;
                        let mut sum_dzhat = vec![0.0; d];
                        let mut sum_dzhat_zhat = vec![0.0; d];
                        for i in 0..batch {
                            let (du, zh) = (da.row(i), zhat.row(i));
                            for j in 0..d {
                                let dzh = du[j] * bl.gamma[j];
                                sum_dzhat[j] += dzh;
                                sum_dzhat_zhat[j] += dzh * zh[j];
                            }
                        }
                        for i in 0..batch {
                            let zh = zhat.row(i).to_vec();
                            let row = da.row_mut(i);
                            for j in 0..d {
                                let dzh = row[j] * bl.gamma[j];
                                row[j] = hc.inv_std[j] / m * (m * dzh - sum_dzhat[j] - zh[j] * sum_dzhat_zhat[j]);
                            }
                        }
                    }
                    Mode::Infer => {
                        for i in 0..batch {
                            let row = da.row_mut(i);
                            for j in 0..d {
                                row[j] *= bl.gamma[j] * hc.inv_std[j];
                            }
                        }
                    }
                }
            }
            delta = da;
        }

        if l2 > 0.0 {
            for (g, p) in grads.layers.iter_mut().zip(&self.layers) {
                for (gv, pv) in g.weights.iter_mut().zip(&p.weights) {
                    *gv += 2.0 * l2 * pv;
                }
                for (gv, pv) in g.bias.iter_mut().zip(&p.bias) {
                    *gv += 2.0 * l2 * pv;
                }
            }
        }
        Ok(grads)
    }
}

fn affine(input: &Matrix, layer: &DenseLayer) -> Matrix {
    let batch = input.rows();
    let mut z = Matrix::zeros(batch, layer.rows);
    for i in 0..batch {
        z.row_mut(i).copy_from_slice(&layer.bias);
    }
    gemm_a_bt(input.as_slice(), batch, layer.cols, &layer.weights, layer.rows, 1.0, z.as_mut_slice());
    z
}

/// Per-column mean and biased variance.
fn column_moments(z: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (z.rows(), z.cols());
    let mut mean = vec![0.0; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(z.row(i)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for i in 0..n {
        for ((s, v), m) in var.iter_mut().zip(z.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n as f64);
    (mean, var)
}
