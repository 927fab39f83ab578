//! The joint-input network: one scalar score `f(x, y)` per grid point,
//! normalized by a softmax over the whole grid. It needs a forward pass at
//! every grid point for each likelihood and is kept to compare that cost
//! against the spatial network.

use crate::error::{Error, Result};
use crate::nncore::{log_sum_exp, Matrix, NetworkParams, OutputHead};

use super::grid::Grid;

/// Input of the score network at grid point `y`.
pub fn joint_input_row(x: &[f64], y: i64, out: &mut Vec<f64>) {
    out.extend_from_slice(x);
    out.push(y as f64 / 50.0);
}

/// `log P[y | x]` under the grid softmax of `net`, and the number of network
/// evaluations used.
pub fn joint_input_loglik(net: &NetworkParams, x: &[f64], y: i64, grid: &Grid) -> Result<(f64, usize)> {
    if net.output_head != OutputHead::ScalarLogit || net.input_dim() != x.len() + 1 {
        return Err(Error::DimensionMismatch {
            layer: 0,
            expected: x.len() + 1,
            got: net.input_dim(),
        });
    }
    if !grid.contains(y) {
        return Ok((f64::NEG_INFINITY, 0));
    }
    let mut rows = Vec::with_capacity(grid.size() * (x.len() + 1));
    for v in grid.values() {
        joint_input_row(x, v, &mut rows);
    }
    let scores = net.predict(&Matrix::from_vec(grid.size(), x.len() + 1, rows))?.into_vec();
    Ok((scores[grid.index(y)] - log_sum_exp(&scores), scores.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::ActivationKind;
    use crate::seed::rng_for;

    #[test]
    fn constant_score_is_uniform() {
        let g = Grid::truncated();
        let mut net =
            NetworkParams::init(&[4, 3, 1], ActivationKind::Tanh, OutputHead::ScalarLogit, false, &mut rng_for(0, "t"))
                .unwrap();
        for s in net.param_slices_mut() {
            s.iter_mut().for_each(|v| *v = 0.0);
        }
        net.layers[1].bias[0] = 2.0;
        let (ll, n) = joint_input_loglik(&net, &[0.3, -1.0, 2.0], 7, &g).unwrap();
        assert!((ll + 101f64.ln()).abs() < 1e-12);
        assert_eq!(n, 101);
    }

    #[test]
    fn matches_direct_softmax() {
        let g = Grid::truncated();
        let net =
            NetworkParams::init(&[3, 5, 1], ActivationKind::Tanh, OutputHead::ScalarLogit, false, &mut rng_for(1, "t"))
                .unwrap();
        let x = [0.5, -0.25];
        let scores: Vec<f64> = g
            .values()
            .map(|v| net.forward_one(&[x[0], x[1], v as f64 / 50.0]).unwrap()[0])
            .collect();
        let z: f64 = scores.iter().map(|s| s.exp()).sum();
        for y in [-50, -3, 0, 12, 50] {
            let (ll, _) = joint_input_loglik(&net, &x, y, &g).unwrap();
            assert!((ll - (scores[g.index(y)].exp() / z).ln()).abs() < 1e-12);
        }
    }
}
