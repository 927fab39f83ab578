use serde::{Deserialize, Serialize};

use crate::data::{CaseMode, JointMove, LOBState, NormalizationStats};
use crate::error::{Error, Result};

use super::dist::{case2_support_restrict, ComponentModel, ComponentPmf};
use super::grid::Grid;
use super::inputs::SampleFeatures;
use super::Family;

/// Label counts over the grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaiveCounts {
    pub total: u64,
    /// Counts of `y1`, grid order.
    pub y1: Vec<u64>,
    /// `y2` counts for each `y1`, row-major `y1 x y2`.
    pub joint: Vec<u64>,
}

/// Empirical distribution of training labels, ignoring the state.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveEmpiricalModel {
    pub grid: Grid,
    pub case: CaseMode,
    pub counts: NaiveCounts,
    /// Add one to every grid cell before normalizing.
    pub smoothing: bool,
    pub stats: Option<NormalizationStats>,
}

impl NaiveEmpiricalModel {
    /// Count labels inside the grid; labels outside it are skipped.
    pub fn fit<'a, I>(labels: I, case: CaseMode, smoothing: bool) -> Result<Self>
    where
        I: IntoIterator<Item = &'a JointMove>,
    {
        let grid = Grid::truncated();
        let n = grid.size();
        let mut counts = NaiveCounts {
            total: 0,
            y1: vec![0; n],
            joint: vec![0; n * n],
        };
        for m in labels {
            if !grid.contains(m.y1) || !grid.contains(m.y2) {
                continue;
            }
            let (i, j) = (grid.index(m.y1), grid.index(m.y2));
            counts.total += 1;
            counts.y1[i] += 1;
            counts.joint[i * n + j] += 1;
        }
        if counts.total == 0 {
            return Err(Error::arg("naive_fit", "no labels inside the grid"));
        }
        Ok(Self {
            grid,
            case,
            counts,
            smoothing,
            stats: None,
        })
    }

    fn alpha(&self) -> f64 {
        if self.smoothing {
            1.0
        } else {
            0.0
        }
    }

    fn raw_pmf2(&self, y1: i64) -> ComponentPmf {
        let n = self.grid.size();
        let a = self.alpha();
        let mut probs = vec![0.0; n];
        if self.grid.contains(y1) {
            let i = self.grid.index(y1);
            let denom = self.counts.y1[i] as f64 + a * n as f64;
            if denom > 0.0 {
                for (j, p) in probs.iter_mut().enumerate() {
                    *p = (self.counts.joint[i * n + j] as f64 + a) / denom;
                }
            }
        }
        ComponentPmf {
            probs,
            residual_up: 0.0,
            residual_down: 0.0,
        }
    }
}

impl ComponentModel for NaiveEmpiricalModel {
    fn family(&self) -> Family {
        Family::Naive
    }

    fn grid(&self) -> Grid {
        self.grid
    }

    fn case_mode(&self) -> CaseMode {
        self.case
    }

    fn prepare(&self, state: &LOBState) -> SampleFeatures {
        match &self.stats {
            Some(s) => SampleFeatures::new(state, s),
            None => SampleFeatures {
                x: Vec::new(),
                imbalance: Vec::new(),
                spread: state.spread(),
            },
        }
    }

    fn pmf1(&self, _: &SampleFeatures) -> Result<ComponentPmf> {
        let n = self.grid.size() as f64;
        let a = self.alpha();
        let denom = self.counts.total as f64 + a * n;
        Ok(ComponentPmf {
            probs: self.counts.y1.iter().map(|&c| (c as f64 + a) / denom).collect(),
            residual_up: 0.0,
            residual_down: 0.0,
        })
    }

    fn pmf2(&self, _: &SampleFeatures, y1: i64) -> Result<ComponentPmf> {
        let raw = self.raw_pmf2(y1);
        Ok(match self.case {
            CaseMode::FixedHorizon => raw,
            CaseMode::NextMove => case2_support_restrict(&self.grid, raw, y1),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::dist::{joint_loglik, joint_pmf, testing::dummy_features};

    fn labels() -> Vec<JointMove> {
        vec![
            JointMove::new(1, 0),
            JointMove::new(1, 0),
            JointMove::new(1, 0),
            JointMove::new(0, 0),
        ]
    }

    #[test]
    fn counting_without_smoothing() {
        let m = NaiveEmpiricalModel::fit(&labels(), CaseMode::FixedHorizon, false).unwrap();
        let x = dummy_features();
        let pmf = joint_pmf(&m, &x).unwrap();
        assert_eq!(pmf.prob(&m.grid, JointMove::new(1, 0)), 0.75);
        assert!((joint_loglik(&m, &x, JointMove::new(1, 0)).unwrap() - 0.75f64.ln()).abs() < 1e-15);
        assert_eq!(joint_loglik(&m, &x, JointMove::new(3, 3)).unwrap(), f64::NEG_INFINITY);

        let single = NaiveEmpiricalModel::fit(&[JointMove::new(-2, 4)], CaseMode::FixedHorizon, false).unwrap();
        assert_eq!(joint_pmf(&single, &x).unwrap().prob(&single.grid, JointMove::new(-2, 4)), 1.0);
    }

    #[test]
    fn add_one_marginal() {
        let m = NaiveEmpiricalModel::fit(&labels(), CaseMode::FixedHorizon, true).unwrap();
        let p1 = m.pmf1(&dummy_features()).unwrap();
        assert_eq!(p1.prob(&m.grid, 7), 1.0 / (4.0 + 101.0));
        assert!((p1.total() - 1.0).abs() < 1e-12);
        assert!(NaiveEmpiricalModel::fit(&[], CaseMode::FixedHorizon, true).is_err());
    }
}
