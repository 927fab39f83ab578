//! Cross-entropy, accuracy and pairwise comparison metrics.

use serde::{Deserialize, Serialize};

use crate::data::LabeledSample;
use crate::error::{Error, Result};
use crate::models::{joint_loglik, predict_topk, tail_conditional, ComponentModel, TailEvent};

/// Largest `k` reported by default.
pub const DEFAULT_K_MAX: usize = 10;

fn zero_probability(op: &'static str, bad: &[usize]) -> Error {
    Error::ZeroProbability {
        op,
        count: bad.len(),
        first: bad[0],
    }
}

/// Per-sample negative log-likelihoods.
pub fn nll_per_sample(model: &dyn ComponentModel, test: &[LabeledSample]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(test.len());
    let mut bad = Vec::new();
    for (i, s) in test.iter().enumerate() {
        let ll = joint_loglik(model, &model.prepare(&s.state), s.label)?;
        if !ll.is_finite() {
            bad.push(i);
        }
        out.push(-ll);
    }
    if !bad.is_empty() {
        return Err(zero_probability("cross_entropy", &bad));
    }
    Ok(out)
}

/// Mean negative log-likelihood in nats.
pub fn cross_entropy(model: &dyn ComponentModel, test: &[LabeledSample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::arg("cross_entropy", "empty test set"));
    }
    Ok(nll_per_sample(model, test)?.iter().sum::<f64>() / test.len() as f64)
}

/// `(err2 - err1) / err2 * 100`: how much lower model 1's error is.
pub fn pct_decrease(err1: f64, err2: f64) -> Result<f64> {
    if !(err2 > 0.0) {
        return Err(Error::arg("pct_decrease", format!("reference error must be positive, got {err2}")));
    }
    Ok((err2 - err1) / err2 * 100.0)
}

/// `wins[i][j]` counts runs where model `i` has strictly lower error than
/// model `j`; `errors[r][i]` is model `i`'s error in run `r`.
pub fn win_matrix(errors: &[Vec<f64>]) -> Vec<Vec<Option<usize>>> {
    let m = errors.first().map_or(0, Vec::len);
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| (i != j).then(|| errors.iter().filter(|r| r[i] < r[j]).count()))
                .collect()
        })
        .collect()
}

/// Mean over runs of `pct_decrease(err_i, err_j)`.
pub fn pct_decrease_matrix(errors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = errors.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; m]; m];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut sum = 0.0;
            for r in errors {
                sum += pct_decrease(r[i], r[j])?;
            }
            *cell = sum / errors.len() as f64;
        }
    }
    Ok(out)
}

/// Position of `label` in the model's top-`k_max` list, if present.
pub fn label_rank(model: &dyn ComponentModel, s: &LabeledSample, k_max: usize) -> Result<Option<usize>> {
    let top = predict_topk(model, &model.prepare(&s.state), k_max)?;
    Ok(top.iter().position(|(m, _)| *m == s.label))
}

/// Top-`k` accuracy in percent for `k = 1..=k_max`.
pub fn topk_accuracy(model: &dyn ComponentModel, test: &[LabeledSample], k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::arg("topk_accuracy", "k_max must be at least 1"));
    }
    if test.is_empty() {
        return Err(Error::arg("topk_accuracy", "empty test set"));
    }
    let mut hits = vec![0usize; k_max];
    for s in test {
        if let Some(r) = label_rank(model, s, k_max)? {
            hits[r] += 1;
        }
    }
    let mut acc = 0;
    Ok(hits
        .into_iter()
        .map(|h| {
            acc += h;
            100.0 * acc as f64 / test.len() as f64
        })
        .collect())
}

/// Metrics of the magnitude distribution conditional on a tail event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailMetrics {
    pub event: TailEvent,
    pub n: usize,
    pub cross_entropy: f64,
    /// Percent of event samples whose magnitude is among the `k` most likely.
    pub topk: Vec<f64>,
}

/// Evaluate the event-conditional magnitude distribution on the samples where
/// `event` occurred.
pub fn tail_metrics(
    model: &dyn ComponentModel,
    test: &[LabeledSample],
    event: TailEvent,
    k_max: usize,
) -> Result<TailMetrics> {
    let subset: Vec<&LabeledSample> = test.iter().filter(|s| event.contains(s.label)).collect();
    if subset.is_empty() {
        return Err(Error::arg("tail_metrics", format!("no {event:?} samples in the test set")));
    }
    let mut nll = 0.0;
    let mut hits = vec![0usize; k_max];
    let mut bad = Vec::new();
    for (i, s) in subset.iter().enumerate() {
        let c = tail_conditional(model, &model.prepare(&s.state), event)?;
        let m = event.magnitude(s.label);
        let p = c.prob(m);
        if p > 0.0 {
            nll -= p.ln();
        } else {
            bad.push(i);
        }
        // Rank among magnitudes: higher probability first, smaller magnitude on ties.
        let rank = c.probs.iter().enumerate().filter(|&(j, &q)| q > p || (q == p && (j as i64 + 1) < m)).count();
        if p > 0.0 && rank < k_max {
            hits[rank] += 1;
        }
    }
    if !bad.is_empty() {
        return Err(zero_probability("tail_metrics", &bad));
    }
    let mut acc = 0;
    let topk = hits
        .into_iter()
        .map(|h| {
            acc += h;
            100.0 * acc as f64 / subset.len() as f64
        })
        .collect();
    Ok(TailMetrics {
        event,
        n: subset.len(),
        cross_entropy: nll / subset.len() as f64,
        topk,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CaseMode, JointMove, LOBState};
    use crate::models::dist::testing::{uniform, FixedModel};
    use crate::models::{ComponentPmf, Grid};

    fn sample(y1: i64, y2: i64) -> LabeledSample {
        let state = LOBState {
            timestamp: 0,
            best_ask_price: 101,
            best_bid_price: 100,
            ask_sizes: vec![100; 50],
            bid_sizes: vec![100; 50],
            halted: false,
        };
        LabeledSample {
            timestamp: 0,
            state,
            label: JointMove::new(y1, y2),
        }
    }

    #[test]
    fn uniform_cross_entropy_and_point_mass() {
        let m = FixedModel {
            p1: uniform(),
            p2: uniform(),
            case: CaseMode::FixedHorizon,
        };
        let test = vec![sample(3, -2), sample(0, 0)];
        assert!((cross_entropy(&m, &test).unwrap() - 2.0 * 101f64.ln()).abs() < 1e-12);
        let g = Grid::truncated();
        let p = FixedModel {
            p1: ComponentPmf::point(&g, 1),
            p2: ComponentPmf::point(&g, 0),
            case: CaseMode::FixedHorizon,
        };
        assert_eq!(cross_entropy(&p, &[sample(1, 0)]).unwrap(), 0.0);
        assert_eq!(topk_accuracy(&p, &[sample(1, 0)], 3).unwrap(), vec![100.0; 3]);
        assert!(matches!(
            cross_entropy(&p, &[sample(1, 0), sample(2, 0)]),
            Err(Error::ZeroProbability { count: 1, first: 1, .. })
        ));
    }

    #[test]
    fn pct_and_wins() {
        assert_eq!(pct_decrease(9.0, 10.0).unwrap(), 10.0);
        assert_eq!(pct_decrease(10.0, 10.0).unwrap(), 0.0);
        assert!(pct_decrease(1.0, 0.0).is_err());
        let (a, b) = (2.3, 1.7);
        assert!((pct_decrease(a, b).unwrap() + pct_decrease(b, a).unwrap() * a / b).abs() < 1e-12);
        let w = win_matrix(&[vec![1.0, 2.0]]);
        assert_eq!(w, vec![vec![None, Some(1)], vec![Some(0), None]]);
        let w = win_matrix(&[vec![1.0, 1.0]]);
        assert_eq!(w[0][1], Some(0));
        assert_eq!(w[1][0], Some(0));
    }

    #[test]
    fn uniform_topk_follows_tie_order() {
        let m = FixedModel {
            p1: uniform(),
            p2: uniform(),
            case: CaseMode::FixedHorizon,
        };
        // Tie order starts (0,0), (0,1), (0,-1), (0,2).
        let test = vec![sample(0, 0), sample(0, 1), sample(0, -1), sample(0, 2)];
        let acc = topk_accuracy(&m, &test, 4).unwrap();
        assert_eq!(acc, vec![25.0, 50.0, 75.0, 100.0]);
    }

    #[test]
    fn tail_metrics_uniform_magnitudes() {
        let g = Grid::truncated();
        let mut p1 = ComponentPmf::point(&g, 0);
        p1.probs[g.index(0)] = 0.0;
        for y in 1..=50 {
            p1.probs[g.index(y)] = 0.6 / 50.0;
            p1.probs[g.index(-y)] = 0.4 / 50.0;
        }
        let m = FixedModel {
            p1,
            p2: uniform(),
            case: CaseMode::FixedHorizon,
        };
        let test = vec![sample(3, 0), sample(-2, 0), sample(7, 1)];
        let t = tail_metrics(&m, &test, TailEvent::AskUp, 5).unwrap();
        assert_eq!(t.n, 2);
        assert!((t.cross_entropy - 50f64.ln()).abs() < 1e-12);
        assert!(tail_metrics(&m, &[sample(-1, 0)], TailEvent::AskUp, 5).is_err());
    }
}
