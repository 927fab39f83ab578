//! The interface shared by all model families and the algorithms built on it.
//!
//! A joint model factors as `P[y1] * P[y2 | y1]`. Each family supplies the two
//! component distributions on the grid; materialization, top-k, tail
//! conditionals and sampling are generic.

use std::cmp::Ordering;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::data::{CaseMode, JointMove, LOBState};
use crate::error::{Error, Result};

use super::grid::Grid;
use super::inputs::SampleFeatures;
use super::Family;

/// One component's distribution on the grid plus any mass beyond it.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPmf {
    pub probs: Vec<f64>,
    pub residual_up: f64,
    pub residual_down: f64,
}

impl ComponentPmf {
    pub fn point(grid: &Grid, y: i64) -> Self {
        let mut probs = vec![0.0; grid.size()];
        probs[grid.index(y)] = 1.0;
        Self {
            probs,
            residual_up: 0.0,
            residual_down: 0.0,
        }
    }

    pub fn prob(&self, grid: &Grid, y: i64) -> f64 {
        if grid.contains(y) {
            self.probs[grid.index(y)]
        } else {
            0.0
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.residual_up + self.residual_down
    }

    pub fn residual(&self) -> f64 {
        self.residual_up + self.residual_down
    }
}

/// A label drawn from a model; `capped` is set when an open-ended magnitude hit
/// the sampling cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampled {
    pub label: JointMove,
    pub capped: bool,
}

/// A model of `(y1, y2)` given an order-book state.
pub trait ComponentModel: Send + Sync {
    fn family(&self) -> Family;
    fn grid(&self) -> Grid;
    fn case_mode(&self) -> CaseMode;

    /// Features of `state` under the model's normalization.
    fn prepare(&self, state: &LOBState) -> SampleFeatures;

    /// Marginal distribution of `y1`.
    fn pmf1(&self, x: &SampleFeatures) -> Result<ComponentPmf>;

    /// Conditional distribution of `y2` given `y1`, with the next-move support
    /// restriction applied in that case mode.
    fn pmf2(&self, x: &SampleFeatures, y1: i64) -> Result<ComponentPmf>;

    /// `pmf2` for every grid value of `y1`, in grid order.
    fn pmf2_all(&self, x: &SampleFeatures) -> Result<Vec<ComponentPmf>> {
        let g = self.grid();
        g.values().map(|y1| self.pmf2(x, y1)).collect()
    }

    fn log_prob1(&self, x: &SampleFeatures, y1: i64) -> Result<f64> {
        Ok(self.pmf1(x)?.prob(&self.grid(), y1).ln())
    }

    fn log_prob2(&self, x: &SampleFeatures, y1: i64, y2: i64) -> Result<f64> {
        Ok(self.pmf2(x, y1)?.prob(&self.grid(), y2).ln())
    }

    /// Ancestral sample of `(y1, y2)`.
    fn sample(&self, x: &SampleFeatures, rng: &mut dyn RngCore) -> Result<Sampled> {
        let g = self.grid();
        let y1 = draw(&g, &self.pmf1(x)?, rng);
        let y2 = draw(&g, &self.pmf2(x, y1)?, rng);
        Ok(Sampled {
            label: JointMove::new(y1, y2),
            capped: false,
        })
    }
}

fn draw(grid: &Grid, pmf: &ComponentPmf, rng: &mut dyn RngCore) -> i64 {
    let total: f64 = pmf.probs.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in pmf.probs.iter().enumerate() {
        if *p > 0.0 {
            last = i;
        }
        acc += p;
        if u < acc {
            return grid.value(i);
        }
    }
    grid.value(last)
}

/// Apply the next-move support rule to a raw conditional of `y2`: a point mass
/// at 0 when `y1` moved, otherwise the distribution renormalized without 0.
pub fn case2_support_restrict(grid: &Grid, raw: ComponentPmf, y1: i64) -> ComponentPmf {
    if y1 != 0 {
        return ComponentPmf::point(grid, 0);
    }
    let mut out = raw;
    let zero = grid.index(0);
    out.probs[zero] = 0.0;
    let mass = out.total();
    if mass > 0.0 {
        out.probs.iter_mut().for_each(|p| *p /= mass);
        out.residual_up /= mass;
        out.residual_down /= mass;
    }
    out
}

/// `log P[y1] + log P[y2 | y1]`; `-inf` when the label has zero probability.
pub fn joint_loglik(model: &dyn ComponentModel, x: &SampleFeatures, label: JointMove) -> Result<f64> {
    let l1 = model.log_prob1(x, label.y1)?;
    if l1 == f64::NEG_INFINITY {
        return Ok(l1);
    }
    Ok(l1 + model.log_prob2(x, label.y1, label.y2)?)
}

/// A materialized joint distribution over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub model: Family,
    pub support: Vec<JointMove>,
    pub probs: Vec<f64>,
    /// Mass on outcomes with a component beyond the grid.
    pub residual: f64,
}

impl PredictiveDistribution {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.residual
    }

    /// Probability of `label`; the support is `y1`-major over the grid.
    pub fn prob(&self, grid: &Grid, label: JointMove) -> f64 {
        if !grid.contains(label.y1) || !grid.contains(label.y2) {
            return 0.0;
        }
        self.probs[grid.index(label.y1) * grid.size() + grid.index(label.y2)]
    }
}

/// Materialize `P[y1, y2]` for every grid pair.
pub fn joint_pmf(model: &dyn ComponentModel, x: &SampleFeatures) -> Result<PredictiveDistribution> {
    let g = model.grid();
    let p1 = model.pmf1(x)?;
    let p2 = model.pmf2_all(x)?;
    let n = g.size();
    let mut support = Vec::with_capacity(n * n);
    let mut probs = Vec::with_capacity(n * n);
    let mut residual = p1.residual();
    for (i, c) in p2.iter().enumerate() {
        let a = p1.probs[i];
        for (j, b) in c.probs.iter().enumerate() {
            support.push(JointMove::new(g.value(i), g.value(j)));
            probs.push(a * b);
        }
        residual += a * c.residual();
    }
    Ok(PredictiveDistribution {
        model: model.family(),
        support,
        probs,
        residual,
    })
}

/// Deterministic tie-break among equally likely outcomes: smaller moves first,
/// then up before down.
pub fn tie_key(m: &JointMove) -> (i64, i64, bool, bool) {
    (m.y1.abs(), m.y2.abs(), m.y1 < 0, m.y2 < 0)
}

pub fn outcome_order(a: &(JointMove, f64), b: &(JointMove, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| tie_key(&a.0).cmp(&tie_key(&b.0)))
}

/// The `k` most likely grid outcomes, best first.
///
/// `y1` values are visited in decreasing marginal probability and the search
/// stops once a marginal falls strictly below the current `k`-th joint
/// probability, since `P[y1, y2] <= P[y1]`.
pub fn predict_topk(model: &dyn ComponentModel, x: &SampleFeatures, k: usize) -> Result<Vec<(JointMove, f64)>> {
    let g = model.grid();
    if k == 0 || k > g.size() * g.size() {
        return Err(Error::arg("predict_topk", format!("k = {k} outside 1..={}", g.size() * g.size())));
    }
    let p1 = model.pmf1(x)?;
    let mut order: Vec<(JointMove, f64)> = g.values().map(|y| (JointMove::new(y, 0), p1.prob(&g, y))).collect();
    order.sort_by(outcome_order);
    let mut best: Vec<(JointMove, f64)> = Vec::with_capacity(k + g.size());
    for (m, p) in order {
        if best.len() == k && p < best[k - 1].1 {
            break;
        }
        let c = model.pmf2(x, m.y1)?;
        for y2 in g.values() {
            best.push((JointMove::new(m.y1, y2), p * c.prob(&g, y2)));
        }
        best.sort_by(outcome_order);
        best.truncate(k);
    }
    Ok(best)
}

/// Events whose conditional magnitude distribution is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEvent {
    AskUp,
    AskDown,
    BidUp,
    BidDown,
}

impl TailEvent {
    pub fn component(self) -> usize {
        match self {
            TailEvent::AskUp | TailEvent::AskDown => 1,
            TailEvent::BidUp | TailEvent::BidDown => 2,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            TailEvent::AskUp | TailEvent::BidUp => 1,
            TailEvent::AskDown | TailEvent::BidDown => -1,
        }
    }

    /// Whether `label` belongs to the event.
    pub fn contains(self, label: JointMove) -> bool {
        label.get(self.component()).signum() == self.sign()
    }

    /// Magnitude of `label` along the event's component.
    pub fn magnitude(self, label: JointMove) -> i64 {
        label.get(self.component()).abs()
    }
}

/// Distribution of the move magnitude given the event, on `1..=grid.half`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPmf {
    /// `probs[m - 1] = P[|Y| = m | event]`.
    pub probs: Vec<f64>,
    pub residual: f64,
}

impl ConditionalPmf {
    pub fn prob(&self, m: i64) -> f64 {
        if m >= 1 && (m as usize) <= self.probs.len() {
            self.probs[m as usize - 1]
        } else {
            0.0
        }
    }
}

/// Magnitude distribution conditional on `event`.
///
/// Bid events marginalize `y1` over the grid; `y1` mass beyond the grid is not
/// included.
pub fn tail_conditional(model: &dyn ComponentModel, x: &SampleFeatures, event: TailEvent) -> Result<ConditionalPmf> {
    let g = model.grid();
    let half = g.half;
    let s = event.sign();
    let (mut probs, mut residual) = (vec![0.0; half as usize], 0.0);
    let mut add = |c: &ComponentPmf, w: f64| {
        for m in 1..=half {
            probs[m as usize - 1] += w * c.prob(&g, s * m);
        }
        residual += w * if s > 0 { c.residual_up } else { c.residual_down };
    };
    match event.component() {
        1 => add(&model.pmf1(x)?, 1.0),
        _ => {
            let p1 = model.pmf1(x)?;
            for (c, w) in model.pmf2_all(x)?.iter().zip(&p1.probs) {
                if *w > 0.0 {
                    add(c, *w);
                }
            }
        }
    }
    let mass: f64 = probs.iter().sum::<f64>() + residual;
    if !(mass > 0.0) {
        return Err(Error::ZeroProbability {
            op: "tail_conditional",
            count: 1,
            first: 0,
        });
    }
    probs.iter_mut().for_each(|p| *p /= mass);
    Ok(ConditionalPmf {
        probs,
        residual: residual / mass,
    })
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;

    #[test]
    fn point_mass_topk_and_pmf() {
        let g = Grid::truncated();
        let m = FixedModel {
            p1: ComponentPmf::point(&g, 2),
            p2: ComponentPmf::point(&g, -1),
            case: CaseMode::FixedHorizon,
        };
        let x = dummy_features();
        let top = predict_topk(&m, &x, 1).unwrap();
        assert_eq!(top[0], (JointMove::new(2, -1), 1.0));
        let pmf = joint_pmf(&m, &x).unwrap();
        assert_eq!(pmf.prob(&g, JointMove::new(2, -1)), 1.0);
        assert_eq!(joint_loglik(&m, &x, JointMove::new(2, -1)).unwrap(), 0.0);
    }

    #[test]
    fn uniform_topk_returns_tie_order() {
        let m = FixedModel {
            p1: uniform(),
            p2: uniform(),
            case: CaseMode::FixedHorizon,
        };
        let x = dummy_features();
        let all = predict_topk(&m, &x, 101 * 101).unwrap();
        assert_eq!(all.len(), 101 * 101);
        assert_eq!(all[0].0, JointMove::new(0, 0));
        assert_eq!(all[1].0, JointMove::new(0, 1));
        assert_eq!(all[2].0, JointMove::new(0, -1));
        let top5 = predict_topk(&m, &x, 5).unwrap();
        assert_eq!(&all[..5], &top5[..]);
        assert!(predict_topk(&m, &x, 0).is_err());
    }

    #[test]
    fn case2_restriction() {
        let g = Grid::truncated();
        let m = FixedModel {
            p1: uniform(),
            p2: uniform(),
            case: CaseMode::NextMove,
        };
        let x = dummy_features();
        let pmf = joint_pmf(&m, &x).unwrap();
        assert_eq!(pmf.prob(&g, JointMove::new(0, 0)), 0.0);
        assert!((pmf.total() - 1.0).abs() < 1e-9);
        let c = m.pmf2(&x, 2).unwrap();
        assert_eq!(c.prob(&g, 0), 1.0);
        assert_eq!(m.log_prob2(&x, 2, 0).unwrap(), 0.0);
    }

    #[test]
    fn tail_conditional_geometric() {
        let g = Grid::truncated();
        let mut p1 = ComponentPmf::point(&g, 0);
        p1.probs[g.index(0)] = 0.0;
        // Geometric with stop probability 0.3 on the up side.
        let mut surv = 1.0;
        for m in 1..=50 {
            p1.probs[g.index(m)] = 0.3 * surv;
            surv *= 0.7;
        }
        p1.residual_up = surv;
        let m = FixedModel {
            p1,
            p2: uniform(),
            case: CaseMode::FixedHorizon,
        };
        let c = tail_conditional(&m, &dummy_features(), TailEvent::AskUp).unwrap();
        assert!((c.prob(1) - 0.3).abs() < 1e-15);
        assert!((c.prob(2) - 0.21).abs() < 1e-15);
        assert!(tail_conditional(&m, &dummy_features(), TailEvent::AskDown).is_err());
    }
}
