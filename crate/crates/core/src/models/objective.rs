//! Per-network loss pieces used by the family objectives.
//!
//! Losses are summed over rows and scaled by `scale` (one over the number of
//! samples in the minibatch), so several networks fed from one minibatch add up
//! to the mean per-sample negative log-likelihood.

use crate::error::Result;
use crate::nncore::ops::{log_step_probability, softplus};
use crate::nncore::{sigmoid, BatchContext, DropoutMasks, Gradients, Matrix, Mode, NetworkParams};

/// Rows evaluated per forward pass when scoring large sets.
pub const EVAL_CHUNK: usize = 2048;

/// Gradient of `l2 * ||theta||^2` alone, for a network with no rows in the batch.
pub fn l2_only(net: &NetworkParams, l2: f64) -> Gradients {
    let mut g = Gradients::zeros_like(net);
    if l2 > 0.0 {
        for (gl, pl) in g.layers.iter_mut().zip(&net.layers) {
            for (a, b) in gl.weights.iter_mut().zip(&pl.weights) {
                *a = 2.0 * l2 * b;
            }
            for (a, b) in gl.bias.iter_mut().zip(&pl.bias) {
                *a = 2.0 * l2 * b;
            }
        }
    }
    g
}

fn train_forward(net: &mut NetworkParams, x: &Matrix, ctx: &mut BatchContext<'_>) -> Result<crate::nncore::ForwardCache> {
    let masks = (ctx.dropout_rate > 0.0 && net.depth() > 1)
        .then(|| DropoutMasks::sample(net, x.rows(), ctx.dropout_rate, ctx.rng));
    let cache = net.forward(x, Mode::Train, masks.as_ref())?;
    net.update_running_stats(&cache);
    Ok(cache)
}

/// Log-softmax of `z` with class `masked` excluded from the support.
pub fn log_softmax_masked(z: &[f64], masked: Option<usize>) -> Vec<f64> {
    let max = z
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != masked)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != masked)
        .map(|(_, v)| (v - max).exp())
        .sum();
    let lse = max + sum.ln();
    z.iter()
        .enumerate()
        .map(|(i, v)| if Some(i) == masked { f64::NEG_INFINITY } else { v - lse })
        .collect()
}

/// Softmax cross-entropy for a train-mode batch.
pub fn softmax_xent_train(
    net: &mut NetworkParams,
    x: &Matrix,
    targets: &[usize],
    masked: Option<usize>,
    scale: f64,
    ctx: &mut BatchContext<'_>,
) -> Result<(f64, Gradients)> {
    if x.rows() == 0 {
        return Ok((0.0, l2_only(net, ctx.l2_lambda)));
    }
    let cache = train_forward(net, x, ctx)?;
    let out = cache.output();
    let mut up = Matrix::zeros(out.rows(), out.cols());
    let mut loss = 0.0;
    for (r, &t) in targets.iter().enumerate() {
        let lp = log_softmax_masked(out.row(r), masked);
        loss -= lp[t];
        let row = up.row_mut(r);
        for (j, v) in row.iter_mut().enumerate() {
            let p = lp[j].exp();
            *v = scale * (p - if j == t { 1.0 } else { 0.0 });
        }
    }
    let g = net.backward(&cache, &up, ctx.l2_lambda)?;
    Ok((scale * loss, g))
}

/// Summed softmax cross-entropy in infer mode.
pub fn softmax_xent_eval(net: &NetworkParams, x: &Matrix, targets: &[usize], masked: Option<usize>) -> Result<f64> {
    if x.rows() == 0 {
        return Ok(0.0);
    }
    let out = net.predict(x)?;
    Ok(targets
        .iter()
        .enumerate()
        .map(|(r, &t)| -log_softmax_masked(out.row(r), masked)[t])
        .sum())
}

/// Logistic cross-entropy of a scalar-logit network against 0/1 targets, train mode.
pub fn binary_xent_train(
    net: &mut NetworkParams,
    x: &Matrix,
    targets: &[f64],
    scale: f64,
    ctx: &mut BatchContext<'_>,
) -> Result<(f64, Gradients)> {
    if x.rows() == 0 {
        return Ok((0.0, l2_only(net, ctx.l2_lambda)));
    }
    let cache = train_forward(net, x, ctx)?;
    let out = cache.output();
    let mut up = Matrix::zeros(out.rows(), 1);
    let mut loss = 0.0;
    for (r, &t) in targets.iter().enumerate() {
        let f = out.get(r, 0);
        loss += softplus(f) - t * f;
        up.set(r, 0, scale * (sigmoid(f) - t));
    }
    let g = net.backward(&cache, &up, ctx.l2_lambda)?;
    Ok((scale * loss, g))
}

pub fn binary_xent_eval(net: &NetworkParams, x: &Matrix, targets: &[f64]) -> Result<f64> {
    if x.rows() == 0 {
        return Ok(0.0);
    }
    let out = net.predict(x)?;
    Ok(targets
        .iter()
        .enumerate()
        .map(|(r, &t)| {
            let f = out.get(r, 0);
            -(t * log_step_probability(f) + (1.0 - t) * log_step_probability(-f))
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masked_log_softmax() {
        let lp = log_softmax_masked(&[0.0, 5.0, 0.0], Some(1));
        assert!((lp[0] - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(lp[1], f64::NEG_INFINITY);
        let lp = log_softmax_masked(&[1f64.ln(), 3f64.ln()], None);
        assert!((lp[1] - 0.75f64.ln()).abs() < 1e-15);
    }
}
