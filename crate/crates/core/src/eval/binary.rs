//! Logistic fits of a scalar-logit network on rows generated on demand.

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::models::objective::{binary_xent_eval, binary_xent_train, EVAL_CHUNK};
use crate::nncore::{fit, BatchContext, FitResult, Gradients, Matrix, NetworkParams, Objective, TrainConfig};

/// Binary cross-entropy over rows produced by `row(i, out) -> target`.
pub(crate) struct RowObjective<F> {
    pub dim: usize,
    pub row: F,
}

impl<F: Fn(usize, &mut Vec<f64>) -> f64> RowObjective<F> {
    fn build(&self, idx: &[usize]) -> (Matrix, Vec<f64>) {
        let mut rows = Vec::with_capacity(idx.len() * self.dim);
        let targets = idx.iter().map(|&i| (self.row)(i, &mut rows)).collect::<Vec<_>>();
        (Matrix::from_vec(idx.len(), self.dim, rows), targets)
    }
}

impl<F: Fn(usize, &mut Vec<f64>) -> f64> Objective for RowObjective<F> {
    fn train_batch(
        &self,
        nets: &mut [NetworkParams],
        batch: &[usize],
        ctx: &mut BatchContext<'_>,
    ) -> Result<(f64, Vec<Gradients>)> {
        let (x, t) = self.build(batch);
        let (l, g) = binary_xent_train(&mut nets[0], &x, &t, 1.0 / batch.len() as f64, ctx)?;
        Ok((l, vec![g]))
    }

    fn eval_loss(&self, nets: &[NetworkParams], idx: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for chunk in idx.chunks(EVAL_CHUNK) {
            let (x, t) = self.build(chunk);
            total += binary_xent_eval(&nets[0], &x, &t)?;
        }
        Ok(total / idx.len() as f64)
    }
}

/// Fit `net` and return the best-by-validation network.
pub(crate) fn fit_binary<F: Fn(usize, &mut Vec<f64>) -> f64>(
    net: NetworkParams,
    row: F,
    train: &[usize],
    val: &[usize],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(NetworkParams, FitResult)> {
    let obj = RowObjective {
        dim: net.input_dim(),
        row,
    };
    let res = fit(&obj, vec![net], train, val, cfg, rng)?;
    Ok((res.nets[0].clone(), res))
}

/// Mean binary cross-entropy of `net` on rows `idx`.
pub(crate) fn binary_loss<F: Fn(usize, &mut Vec<f64>) -> f64>(net: &NetworkParams, row: F, idx: &[usize]) -> Result<f64> {
    RowObjective {
        dim: net.input_dim(),
        row,
    }
    .eval_loss(std::slice::from_ref(net), idx)
}
