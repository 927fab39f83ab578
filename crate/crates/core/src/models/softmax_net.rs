//! Logistic regression and the standard network: a softmax over the grid for
//! `y1`, and a second softmax for `y2` whose input also carries `y1`.

use rand_chacha::ChaCha8Rng;

use crate::data::{CaseMode, LOBState, NormalizationStats, FEATURE_DIM, LEVELS};
use crate::error::{Error, Result};
use crate::nncore::{
    fit, ActivationKind, BatchContext, FitResult, Gradients, Matrix, NetworkParams, Objective, OutputHead,
    TrainConfig,
};

use super::dist::{ComponentModel, ComponentPmf};
use super::grid::Grid;
use super::inputs::{SampleFeatures, Y1_ENC_DIM};
use super::objective::{log_softmax_masked, softmax_xent_eval, softmax_xent_train, EVAL_CHUNK};
use super::samples::SampleView;
use super::Family;

/// Two softmax networks over the grid, one per component.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSoftmaxModel {
    pub family: Family,
    pub grid: Grid,
    pub case: CaseMode,
    pub net1: NetworkParams,
    pub net2: NetworkParams,
    pub stats: NormalizationStats,
}

pub type LogisticModel = GridSoftmaxModel;
pub type StandardNetModel = GridSoftmaxModel;

/// Width of the first-component input for `family`.
pub fn base_input_dim(family: Family) -> usize {
    match family {
        Family::Logistic => FEATURE_DIM + LEVELS,
        _ => FEATURE_DIM,
    }
}

fn push_base(family: Family, x: &SampleFeatures, out: &mut Vec<f64>) {
    out.extend_from_slice(&x.x);
    if family == Family::Logistic {
        out.extend_from_slice(&x.imbalance);
    }
}

fn push_second(family: Family, x: &SampleFeatures, y1: i64, out: &mut Vec<f64>) {
    push_base(family, x, out);
    out.extend_from_slice(&super::inputs::y1_encoding(y1));
}

/// Grid index excluded from the second component, if any.
fn masked_index(case: CaseMode, grid: &Grid, y1: i64) -> Option<usize> {
    (case == CaseMode::NextMove && y1 == 0).then(|| grid.index(0))
}

/// Whether the second component contributes to the likelihood of a sample.
pub(crate) fn second_is_free(case: CaseMode, y1: i64) -> bool {
    case == CaseMode::NextMove && y1 != 0
}

impl GridSoftmaxModel {
    /// Randomly initialized networks for `family` (logistic or standard).
    pub fn init(
        family: Family,
        case: CaseMode,
        stats: NormalizationStats,
        cfg: &TrainConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let grid = Grid::truncated();
        let d1 = base_input_dim(family);
        let n = grid.size();
        let (net1, net2) = match family {
            Family::Logistic => (
                NetworkParams::init(&[d1, n], ActivationKind::Tanh, OutputHead::Softmax, false, rng)?,
                NetworkParams::init(&[d1 + Y1_ENC_DIM, n], ActivationKind::Tanh, OutputHead::Softmax, false, rng)?,
            ),
            Family::Standard => (
                NetworkParams::init(&cfg.dims(d1, n), cfg.activation, OutputHead::Softmax, cfg.batchnorm, rng)?,
                NetworkParams::init(
                    &cfg.dims(d1 + Y1_ENC_DIM, n),
                    cfg.activation,
                    OutputHead::Softmax,
                    cfg.batchnorm,
                    rng,
                )?,
            ),
            other => {
                return Err(Error::arg("GridSoftmaxModel::init", format!("{other} is not a softmax family")));
            }
        };
        Ok(Self {
            family,
            grid,
            case,
            net1,
            net2,
            stats,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.stats.validate()?;
        let d1 = base_input_dim(self.family);
        let n = self.grid.size();
        for (net, d) in [(&self.net1, d1), (&self.net2, d1 + Y1_ENC_DIM)] {
            net.validate()?;
            if net.input_dim() != d || net.output_dim() != n || net.output_head != OutputHead::Softmax {
                return Err(Error::InvalidConfig(format!(
                    "{} network must map {d} inputs to a {n}-way softmax",
                    self.family
                )));
            }
        }
        Ok(())
    }

    fn logits1(&self, x: &SampleFeatures) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(self.net1.input_dim());
        push_base(self.family, x, &mut v);
        self.net1.forward_one(&v)
    }

    fn logits2(&self, x: &SampleFeatures, y1: i64) -> Result<Vec<f64>> {
        let mut v = Vec::with_capacity(self.net2.input_dim());
        push_second(self.family, x, y1, &mut v);
        self.net2.forward_one(&v)
    }

    fn pmf_from_logits(&self, z: &[f64], masked: Option<usize>) -> ComponentPmf {
        ComponentPmf {
            probs: log_softmax_masked(z, masked).into_iter().map(f64::exp).collect(),
            residual_up: 0.0,
            residual_down: 0.0,
        }
    }
}

impl ComponentModel for GridSoftmaxModel {
    fn family(&self) -> Family {
        self.family
    }

    fn grid(&self) -> Grid {
        self.grid
    }

    fn case_mode(&self) -> CaseMode {
        self.case
    }

    fn prepare(&self, state: &LOBState) -> SampleFeatures {
        SampleFeatures::new(state, &self.stats)
    }

    fn pmf1(&self, x: &SampleFeatures) -> Result<ComponentPmf> {
        Ok(self.pmf_from_logits(&self.logits1(x)?, None))
    }

    fn pmf2(&self, x: &SampleFeatures, y1: i64) -> Result<ComponentPmf> {
        if second_is_free(self.case, y1) {
            return Ok(ComponentPmf::point(&self.grid, 0));
        }
        Ok(self.pmf_from_logits(&self.logits2(x, y1)?, masked_index(self.case, &self.grid, y1)))
    }

    fn pmf2_all(&self, x: &SampleFeatures) -> Result<Vec<ComponentPmf>> {
        let ys: Vec<i64> = self.grid.values().filter(|&y| !second_is_free(self.case, y)).collect();
        let mut rows = Vec::with_capacity(ys.len() * self.net2.input_dim());
        for &y in &ys {
            push_second(self.family, x, y, &mut rows);
        }
        let out = self.net2.predict(&Matrix::from_vec(ys.len(), self.net2.input_dim(), rows))?;
        let mut it = ys.iter().zip(0..);
        let mut next = it.next();
        let mut res = Vec::with_capacity(self.grid.size());
        for y1 in self.grid.values() {
            match next {
                Some((&y, r)) if y == y1 => {
                    res.push(self.pmf_from_logits(out.row(r), masked_index(self.case, &self.grid, y1)));
                    next = it.next();
                }
                _ => res.push(ComponentPmf::point(&self.grid, 0)),
            }
        }
        Ok(res)
    }

    fn log_prob1(&self, x: &SampleFeatures, y1: i64) -> Result<f64> {
        if !self.grid.contains(y1) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(log_softmax_masked(&self.logits1(x)?, None)[self.grid.index(y1)])
    }

    fn log_prob2(&self, x: &SampleFeatures, y1: i64, y2: i64) -> Result<f64> {
        if second_is_free(self.case, y1) {
            return Ok(if y2 == 0 { 0.0 } else { f64::NEG_INFINITY });
        }
        if !self.grid.contains(y2) {
            return Ok(f64::NEG_INFINITY);
        }
        let lp = log_softmax_masked(&self.logits2(x, y1)?, masked_index(self.case, &self.grid, y1));
        Ok(lp[self.grid.index(y2)])
    }
}

/// Mean joint negative log-likelihood of the two softmax heads.
pub(crate) struct SoftmaxPairObjective<'a> {
    pub family: Family,
    pub case: CaseMode,
    pub grid: Grid,
    pub view: SampleView<'a>,
    pub stats: &'a NormalizationStats,
}

struct Batch {
    x1: Matrix,
    t1: Vec<usize>,
    x2: Matrix,
    t2: Vec<usize>,
}

impl SoftmaxPairObjective<'_> {
    fn build(&self, idx: &[usize]) -> Batch {
        let d1 = base_input_dim(self.family);
        let mut r1 = Vec::with_capacity(idx.len() * d1);
        let mut r2 = Vec::new();
        let (mut t1, mut t2) = (Vec::with_capacity(idx.len()), Vec::new());
        for &i in idx {
            let s = self.view.get(i);
            let x = SampleFeatures::new(&s.state, self.stats);
            push_base(self.family, &x, &mut r1);
            t1.push(self.grid.index(s.label.y1));
            if !second_is_free(self.case, s.label.y1) {
                push_second(self.family, &x, s.label.y1, &mut r2);
                t2.push(self.grid.index(s.label.y2));
            }
        }
        Batch {
            x1: Matrix::from_vec(t1.len(), d1, r1),
            x2: Matrix::from_vec(t2.len(), d1 + Y1_ENC_DIM, r2),
            t1,
            t2,
        }
    }

    fn mask(&self) -> Option<usize> {
        masked_index(self.case, &self.grid, 0)
    }
}

impl Objective for SoftmaxPairObjective<'_> {
    fn train_batch(
        &self,
        nets: &mut [NetworkParams],
        batch: &[usize],
        ctx: &mut BatchContext<'_>,
    ) -> Result<(f64, Vec<Gradients>)> {
        let b = self.build(batch);
        let scale = 1.0 / batch.len() as f64;
        let (l1, g1) = softmax_xent_train(&mut nets[0], &b.x1, &b.t1, None, scale, ctx)?;
        let (l2, g2) = softmax_xent_train(&mut nets[1], &b.x2, &b.t2, self.mask(), scale, ctx)?;
        Ok((l1 + l2, vec![g1, g2]))
    }

    fn eval_loss(&self, nets: &[NetworkParams], idx: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for chunk in idx.chunks(EVAL_CHUNK) {
            let b = self.build(chunk);
            total += softmax_xent_eval(&nets[0], &b.x1, &b.t1, None)?;
            total += softmax_xent_eval(&nets[1], &b.x2, &b.t2, self.mask())?;
        }
        Ok(total / idx.len() as f64)
    }
}

pub(crate) fn train_softmax(
    family: Family,
    case: CaseMode,
    view: SampleView<'_>,
    train: &[usize],
    val: &[usize],
    stats: NormalizationStats,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(GridSoftmaxModel, FitResult)> {
    let init = GridSoftmaxModel::init(family, case, stats.clone(), cfg, rng)?;
    let objective = SoftmaxPairObjective {
        family,
        case,
        grid: init.grid,
        view,
        stats: &stats,
    };
    let result = fit(&objective, vec![init.net1.clone(), init.net2.clone()], train, val, cfg, rng)?;
    let mut nets = result.nets.clone().into_iter();
    let model = GridSoftmaxModel {
        net1: nets.next().expect("two nets"),
        net2: nets.next().expect("two nets"),
        ..init
    };
    Ok((model, result))
}
