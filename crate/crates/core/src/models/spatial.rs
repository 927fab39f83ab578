//! The spatial network: each component is a three-way class (up, zero, down)
//! followed by a geometric magnitude whose step probability
//! `P[|Y| = y | |Y| >= y, X]` comes from a scalar-logit network that only sees
//! the book near level `y`.

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::data::{CaseMode, Direction, LOBState, NormalizationStats, FEATURE_DIM};
use crate::error::{Error, Result};
use crate::nncore::{
    fit, log_continue_probability, log_step_probability, step_probability, BatchContext, FitResult, Gradients,
    Matrix, NetworkParams, Objective, OutputHead, TrainConfig,
};

use super::dist::{ComponentModel, ComponentPmf, Sampled};
use super::grid::Grid;
use super::inputs::{local_dim, local_features, y1_encoding, SampleFeatures, Y1_ENC_DIM};
use super::objective::{
    binary_xent_eval, binary_xent_train, log_softmax_masked, softmax_xent_eval, softmax_xent_train, EVAL_CHUNK,
};
use super::samples::SampleView;
use super::softmax_net::second_is_free;
use super::Family;
use crate::data::JointMove;

pub const CLASS_UP: usize = 0;
pub const CLASS_ZERO: usize = 1;
pub const CLASS_DOWN: usize = 2;
/// Levels tried before a sampled magnitude is cut off.
pub const SAMPLE_CAP: i64 = 10_000;

pub fn class_of(y: i64) -> usize {
    match y.signum() {
        1 => CLASS_UP,
        0 => CLASS_ZERO,
        _ => CLASS_DOWN,
    }
}

/// Network calls made while scoring one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCount {
    pub class_calls: usize,
    pub step_calls: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialModel {
    pub grid: Grid,
    pub case: CaseMode,
    pub local_window: usize,
    pub h1: NetworkParams,
    pub f1_plus: NetworkParams,
    pub f1_minus: NetworkParams,
    pub h2: NetworkParams,
    pub f2_plus: NetworkParams,
    pub f2_minus: NetworkParams,
    pub stats: NormalizationStats,
}

fn check_component(op: &'static str, component: usize, y_prev: Option<i64>) -> Result<()> {
    match (component, y_prev) {
        (1, _) | (2, Some(_)) => Ok(()),
        (2, None) => Err(Error::arg(op, "component 2 needs y1")),
        _ => Err(Error::arg(op, format!("component must be 1 or 2, got {component}"))),
    }
}

impl SpatialModel {
    /// Names of the six networks in training order.
    pub const NET_NAMES: [&'static str; 6] = ["h1", "f1_plus", "f1_minus", "h2", "f2_plus", "f2_minus"];

    pub fn init(
        case: CaseMode,
        stats: NormalizationStats,
        local_window: usize,
        cfg: &TrainConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if local_window == 0 {
            return Err(Error::InvalidConfig("local_window must be positive".into()));
        }
        let l = local_dim(local_window);
        let mut net = |input: usize, out: usize, head: OutputHead| {
            NetworkParams::init(&cfg.dims(input, out), cfg.activation, head, cfg.batchnorm, rng)
        };
        Ok(Self {
            grid: Grid::open(),
            case,
            local_window,
            h1: net(FEATURE_DIM, 3, OutputHead::Softmax)?,
            f1_plus: net(l, 1, OutputHead::ScalarLogit)?,
            f1_minus: net(l, 1, OutputHead::ScalarLogit)?,
            h2: net(FEATURE_DIM + Y1_ENC_DIM, 3, OutputHead::Softmax)?,
            f2_plus: net(l + Y1_ENC_DIM, 1, OutputHead::ScalarLogit)?,
            f2_minus: net(l + Y1_ENC_DIM, 1, OutputHead::ScalarLogit)?,
            stats,
        })
    }

    pub fn nets(&self) -> [&NetworkParams; 6] {
        [&self.h1, &self.f1_plus, &self.f1_minus, &self.h2, &self.f2_plus, &self.f2_minus]
    }

    pub fn nets_mut(&mut self) -> [&mut NetworkParams; 6] {
        [
            &mut self.h1,
            &mut self.f1_plus,
            &mut self.f1_minus,
            &mut self.h2,
            &mut self.f2_plus,
            &mut self.f2_minus,
        ]
    }

    pub(crate) fn from_nets(template: &SpatialModel, nets: Vec<NetworkParams>) -> Self {
        let mut m = template.clone();
        for (slot, net) in m.nets_mut().into_iter().zip(nets) {
            *slot = net;
        }
        m
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.stats.validate()?;
        if self.local_window == 0 {
            return Err(Error::InvalidConfig("local_window must be positive".into()));
        }
        let l = local_dim(self.local_window);
        let expect = [
            (FEATURE_DIM, 3, OutputHead::Softmax),
            (l, 1, OutputHead::ScalarLogit),
            (l, 1, OutputHead::ScalarLogit),
            (FEATURE_DIM + Y1_ENC_DIM, 3, OutputHead::Softmax),
            (l + Y1_ENC_DIM, 1, OutputHead::ScalarLogit),
            (l + Y1_ENC_DIM, 1, OutputHead::ScalarLogit),
        ];
        for ((net, (din, dout, head)), name) in self.nets().into_iter().zip(expect).zip(Self::NET_NAMES) {
            net.validate()?;
            if net.input_dim() != din || net.output_dim() != dout || net.output_head != head {
                return Err(Error::InvalidConfig(format!(
                    "spatial network {name} must map {din} inputs to {dout} outputs ({head:?})"
                )));
            }
        }
        Ok(())
    }

    fn f_net(&self, component: usize, dir: Direction) -> &NetworkParams {
        match (component, dir) {
            (1, Direction::Up) => &self.f1_plus,
            (1, Direction::Down) => &self.f1_minus,
            (_, Direction::Up) => &self.f2_plus,
            (_, Direction::Down) => &self.f2_minus,
        }
    }

    fn push_step_row(&self, x: &SampleFeatures, dir: Direction, y: i64, y_prev: Option<i64>, out: &mut Vec<f64>) {
        local_features(x, dir, y, self.local_window, out);
        if let Some(p) = y_prev {
            out.extend_from_slice(&y1_encoding(p));
        }
    }

    /// Logits of the step network at levels `1..=n`.
    fn step_logits(
        &self,
        x: &SampleFeatures,
        component: usize,
        dir: Direction,
        y_prev: Option<i64>,
        n: i64,
    ) -> Result<Vec<f64>> {
        let net = self.f_net(component, dir);
        let y_prev = if component == 2 { y_prev } else { None };
        let mut rows = Vec::with_capacity(n as usize * net.input_dim());
        for y in 1..=n {
            self.push_step_row(x, dir, y, y_prev, &mut rows);
        }
        Ok(net.predict(&Matrix::from_vec(n as usize, net.input_dim(), rows))?.into_vec())
    }

    fn step_logit_one(
        &self,
        x: &SampleFeatures,
        component: usize,
        dir: Direction,
        y: i64,
        y_prev: Option<i64>,
    ) -> Result<f64> {
        let net = self.f_net(component, dir);
        let mut row = Vec::with_capacity(net.input_dim());
        self.push_step_row(x, dir, y, if component == 2 { y_prev } else { None }, &mut row);
        Ok(net.forward_one(&row)?[0])
    }

    /// Class log-probabilities `[up, zero, down]`; in next-move mode the
    /// second component excludes zero.
    pub fn class_log_probs(&self, x: &SampleFeatures, component: usize, y_prev: Option<i64>) -> Result<[f64; 3]> {
        check_component("class_log_probs", component, y_prev)?;
        let z = match component {
            1 => self.h1.forward_one(&x.x)?,
            _ => self.h2.forward_one(&x.with_y1(y_prev.unwrap_or(0)))?,
        };
        let masked = (component == 2 && self.case == CaseMode::NextMove).then_some(CLASS_ZERO);
        let lp = log_softmax_masked(&z, masked);
        Ok([lp[0], lp[1], lp[2]])
    }

    /// `P[|Y| = y | |Y| >= y, X]` for the given direction and component.
    pub fn spatial_step(
        &self,
        x: &SampleFeatures,
        dir: Direction,
        component: usize,
        y: i64,
        y_prev: Option<i64>,
    ) -> Result<f64> {
        check_component("spatial_step", component, y_prev)?;
        if y < 1 {
            return Err(Error::arg("spatial_step", format!("level must be >= 1, got {y}")));
        }
        step_probability(self.step_logit_one(x, component, dir, y, y_prev)?)
    }

    /// Distribution of one component on `-n..=n` (index `y + n`) with the mass
    /// beyond `n` in each direction reported separately.
    pub fn spatial_marginal_pmf(
        &self,
        x: &SampleFeatures,
        component: usize,
        y_prev: Option<i64>,
        n: i64,
    ) -> Result<ComponentPmf> {
        check_component("spatial_marginal_pmf", component, y_prev)?;
        if n < 1 {
            return Err(Error::arg("spatial_marginal_pmf", format!("max level must be >= 1, got {n}")));
        }
        let width = (2 * n + 1) as usize;
        let mut pmf = ComponentPmf {
            probs: vec![0.0; width],
            residual_up: 0.0,
            residual_down: 0.0,
        };
        if component == 2 && second_is_free(self.case, y_prev.unwrap_or(0)) {
            pmf.probs[n as usize] = 1.0;
            return Ok(pmf);
        }
        let lc = self.class_log_probs(x, component, y_prev)?;
        pmf.probs[n as usize] = lc[CLASS_ZERO].exp();
        for (dir, class, sign) in [(Direction::Up, CLASS_UP, 1), (Direction::Down, CLASS_DOWN, -1)] {
            if lc[class] == f64::NEG_INFINITY {
                continue;
            }
            let logits = self.step_logits(x, component, dir, y_prev, n)?;
            let mut log_surv = lc[class];
            for (i, f) in logits.iter().enumerate() {
                let y = i as i64 + 1;
                pmf.probs[(n + sign * y) as usize] = (log_surv + log_step_probability(*f)).exp();
                log_surv += log_continue_probability(*f);
            }
            let rest = log_surv.exp();
            if sign > 0 {
                pmf.residual_up = rest;
            } else {
                pmf.residual_down = rest;
            }
        }
        Ok(pmf)
    }

    /// Log-probability of one component value, accumulating network calls.
    fn component_loglik(
        &self,
        x: &SampleFeatures,
        component: usize,
        y_prev: Option<i64>,
        y: i64,
        count: &mut EvalCount,
    ) -> Result<f64> {
        if component == 2 && second_is_free(self.case, y_prev.unwrap_or(0)) {
            return Ok(if y == 0 { 0.0 } else { f64::NEG_INFINITY });
        }
        let lc = self.class_log_probs(x, component, y_prev)?;
        count.class_calls += 1;
        let Some(dir) = Direction::of(y) else {
            return Ok(lc[CLASS_ZERO]);
        };
        let mut lp = lc[class_of(y)];
        if lp == f64::NEG_INFINITY {
            return Ok(lp);
        }
        let logits = self.step_logits(x, component, dir, y_prev, y.abs())?;
        count.step_calls += logits.len();
        let (last, before) = logits.split_last().expect("at least one level");
        lp += before.iter().map(|f| log_continue_probability(*f)).sum::<f64>();
        Ok(lp + log_step_probability(*last))
    }

    /// Joint log-likelihood by telescoping, with the number of network calls.
    pub fn loglik_counted(&self, x: &SampleFeatures, label: JointMove) -> Result<(f64, EvalCount)> {
        let mut count = EvalCount::default();
        let l1 = self.component_loglik(x, 1, None, label.y1, &mut count)?;
        if l1 == f64::NEG_INFINITY {
            return Ok((l1, count));
        }
        let l2 = self.component_loglik(x, 2, Some(label.y1), label.y2, &mut count)?;
        Ok((l1 + l2, count))
    }

    fn sample_component(
        &self,
        x: &SampleFeatures,
        component: usize,
        y_prev: Option<i64>,
        rng: &mut dyn RngCore,
    ) -> Result<(i64, bool)> {
        if component == 2 && second_is_free(self.case, y_prev.unwrap_or(0)) {
            return Ok((0, false));
        }
        let lc = self.class_log_probs(x, component, y_prev)?;
        let u: f64 = rng.random();
        let (p_up, p_zero) = (lc[CLASS_UP].exp(), lc[CLASS_ZERO].exp());
        let (dir, sign) = if u < p_up {
            (Direction::Up, 1)
        } else if u < p_up + p_zero {
            return Ok((0, false));
        } else {
            (Direction::Down, -1)
        };
        for y in 1..=SAMPLE_CAP {
            let q = step_probability(self.step_logit_one(x, component, dir, y, y_prev)?)?;
            if rng.random::<f64>() < q {
                return Ok((sign * y, false));
            }
        }
        Ok((sign * SAMPLE_CAP, true))
    }
}

impl ComponentModel for SpatialModel {
    fn family(&self) -> Family {
        Family::Spatial
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
        self.spatial_marginal_pmf(x, 1, None, self.grid.half)
    }

    fn pmf2(&self, x: &SampleFeatures, y1: i64) -> Result<ComponentPmf> {
        self.spatial_marginal_pmf(x, 2, Some(y1), self.grid.half)
    }

    fn log_prob1(&self, x: &SampleFeatures, y1: i64) -> Result<f64> {
        self.component_loglik(x, 1, None, y1, &mut EvalCount::default())
    }

    fn log_prob2(&self, x: &SampleFeatures, y1: i64, y2: i64) -> Result<f64> {
        self.component_loglik(x, 2, Some(y1), y2, &mut EvalCount::default())
    }

    fn sample(&self, x: &SampleFeatures, rng: &mut dyn RngCore) -> Result<Sampled> {
        let (y1, c1) = self.sample_component(x, 1, None, rng)?;
        let (y2, c2) = self.sample_component(x, 2, Some(y1), rng)?;
        Ok(Sampled {
            label: JointMove::new(y1, y2),
            capped: c1 || c2,
        })
    }
}

/// Mean joint negative log-likelihood summed over the six networks.
pub(crate) struct SpatialObjective<'a> {
    pub case: CaseMode,
    pub template: &'a SpatialModel,
    pub view: SampleView<'a>,
}

#[derive(Default)]
struct ClassRows {
    x: Vec<f64>,
    t: Vec<usize>,
}

#[derive(Default)]
struct StepRows {
    x: Vec<f64>,
    t: Vec<f64>,
}

struct SpatialBatch {
    h1: ClassRows,
    f1: [StepRows; 2],
    h2: ClassRows,
    f2: [StepRows; 2],
}

impl SpatialObjective<'_> {
    fn push_steps(&self, x: &SampleFeatures, y: i64, y_prev: Option<i64>, rows: &mut [StepRows; 2]) {
        let Some(dir) = Direction::of(y) else { return };
        let r = &mut rows[usize::from(dir == Direction::Down)];
        let m = y.abs();
        for level in 1..=m {
            self.template.push_step_row(x, dir, level, y_prev, &mut r.x);
            r.t.push(if level == m { 1.0 } else { 0.0 });
        }
    }

    fn build(&self, idx: &[usize]) -> SpatialBatch {
        let mut b = SpatialBatch {
            h1: ClassRows::default(),
            f1: Default::default(),
            h2: ClassRows::default(),
            f2: Default::default(),
        };
        for &i in idx {
            let s = self.view.get(i);
            let x = SampleFeatures::new(&s.state, &self.template.stats);
            let JointMove { y1, y2 } = s.label;
            b.h1.x.extend_from_slice(&x.x);
            b.h1.t.push(class_of(y1));
            self.push_steps(&x, y1, None, &mut b.f1);
            if !second_is_free(self.case, y1) {
                b.h2.x.extend_from_slice(&x.x);
                b.h2.x.extend_from_slice(&y1_encoding(y1));
                b.h2.t.push(class_of(y2));
                self.push_steps(&x, y2, Some(y1), &mut b.f2);
            }
        }
        b
    }

    fn h2_mask(&self) -> Option<usize> {
        (self.case == CaseMode::NextMove).then_some(CLASS_ZERO)
    }
}

fn matrix(rows: &[f64], n: usize, d: usize) -> Matrix {
    Matrix::from_vec(n, d, rows.to_vec())
}

impl Objective for SpatialObjective<'_> {
    fn train_batch(
        &self,
        nets: &mut [NetworkParams],
        batch: &[usize],
        ctx: &mut BatchContext<'_>,
    ) -> Result<(f64, Vec<Gradients>)> {
        let b = self.build(batch);
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        let mut grads = Vec::with_capacity(6);
        let class_sets = [(0, &b.h1, None), (3, &b.h2, self.h2_mask())];
        let step_sets = [(1, &b.f1[0]), (2, &b.f1[1]), (4, &b.f2[0]), (5, &b.f2[1])];
        let mut out: Vec<Option<Gradients>> = vec![None, None, None, None, None, None];
        for (k, rows, mask) in class_sets {
            let d = nets[k].input_dim();
            let (l, g) = softmax_xent_train(&mut nets[k], &matrix(&rows.x, rows.t.len(), d), &rows.t, mask, scale, ctx)?;
            loss += l;
            out[k] = Some(g);
        }
        for (k, rows) in step_sets {
            let d = nets[k].input_dim();
            let (l, g) = binary_xent_train(&mut nets[k], &matrix(&rows.x, rows.t.len(), d), &rows.t, scale, ctx)?;
            loss += l;
            out[k] = Some(g);
        }
        grads.extend(out.into_iter().map(|g| g.expect("all six networks visited")));
        Ok((loss, grads))
    }

    fn eval_loss(&self, nets: &[NetworkParams], idx: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for chunk in idx.chunks(EVAL_CHUNK) {
            let b = self.build(chunk);
            for (k, rows, mask) in [(0, &b.h1, None), (3, &b.h2, self.h2_mask())] {
                let d = nets[k].input_dim();
                total += softmax_xent_eval(&nets[k], &matrix(&rows.x, rows.t.len(), d), &rows.t, mask)?;
            }
            for (k, rows) in [(1, &b.f1[0]), (2, &b.f1[1]), (4, &b.f2[0]), (5, &b.f2[1])] {
                let d = nets[k].input_dim();
                total += binary_xent_eval(&nets[k], &matrix(&rows.x, rows.t.len(), d), &rows.t)?;
            }
        }
        Ok(total / idx.len() as f64)
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn train_spatial(
    case: CaseMode,
    view: SampleView<'_>,
    train: &[usize],
    val: &[usize],
    stats: NormalizationStats,
    local_window: usize,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(SpatialModel, FitResult)> {
    let init = SpatialModel::init(case, stats, local_window, cfg, rng)?;
    let objective = SpatialObjective {
        case,
        template: &init,
        view,
    };
    let nets = init.nets().into_iter().cloned().collect();
    let result = fit(&objective, nets, train, val, cfg, rng)?;
    let model = SpatialModel::from_nets(&init, result.nets.clone());
    Ok((model, result))
}

#[cfg(test)]
pub(crate) mod testing {
    use super::*;
    use crate::nncore::ActivationKind;
    use crate::seed::rng_for;

    /// A spatial model with zero weights: class logits `class` and every step
    /// logit equal to `step`.
    pub fn constant(case: CaseMode, class: [f64; 3], step: f64) -> SpatialModel {
        let cfg = TrainConfig {
            neurons_per_hidden_layer: 4,
            hidden_layers: 1,
            batchnorm: false,
            activation: ActivationKind::Tanh,
            ..TrainConfig::default()
        };
        let stats = NormalizationStats {
            ask_mean: vec![0.0; crate::data::LEVELS],
            ask_std: vec![1.0; crate::data::LEVELS],
            bid_mean: vec![0.0; crate::data::LEVELS],
            bid_std: vec![1.0; crate::data::LEVELS],
        };
        let mut m = SpatialModel::init(case, stats, 10, &cfg, &mut rng_for(0, "test")).unwrap();
        for (k, net) in m.nets_mut().into_iter().enumerate() {
            for s in net.param_slices_mut() {
                s.iter_mut().for_each(|v| *v = 0.0);
            }
            let bias = &mut net.layers.last_mut().unwrap().bias;
            if k == 0 || k == 3 {
                bias.copy_from_slice(&class);
            } else {
                bias[0] = step;
            }
        }
        m
    }

    /// A randomly initialized small spatial model.
    pub fn random(case: CaseMode, seed: u64) -> SpatialModel {
        let cfg = TrainConfig {
            neurons_per_hidden_layer: 8,
            hidden_layers: 2,
            batchnorm: false,
            ..TrainConfig::default()
        };
        let stats = constant(case, [0.0; 3], 0.0).stats;
        SpatialModel::init(case, stats, 10, &cfg, &mut rng_for(seed, "test")).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use crate::models::dist::{joint_loglik, joint_pmf, tail_conditional, testing::dummy_features, TailEvent};
    use crate::seed::rng_for;

    const ALL_UP: [f64; 3] = [800.0, 0.0, 0.0];

    #[test]
    fn zero_weights_give_half() {
        let m = constant(CaseMode::FixedHorizon, [0.0; 3], 0.0);
        let x = dummy_features();
        for y in [1, 7, 60] {
            assert_eq!(m.spatial_step(&x, Direction::Up, 1, y, None).unwrap(), 0.5);
            assert_eq!(m.spatial_step(&x, Direction::Down, 2, y, Some(3)).unwrap(), 0.5);
        }
        assert!(m.spatial_step(&x, Direction::Up, 2, 1, None).is_err());
        assert!(m.spatial_step(&x, Direction::Up, 1, 0, None).is_err());
    }

    #[test]
    fn geometric_pmf_and_loglik() {
        let m = constant(CaseMode::FixedHorizon, ALL_UP, 0.0);
        let x = dummy_features();
        let p = m.spatial_marginal_pmf(&x, 1, None, 50).unwrap();
        for (y, want) in [(1, 0.5), (2, 0.25), (3, 0.125)] {
            assert!((p.prob(&m.grid, y) - want).abs() < 1e-15);
        }
        assert!((p.residual_up / 0.5f64.powi(50) - 1.0).abs() < 1e-12);
        assert!((m.log_prob1(&x, 3).unwrap() - 0.125f64.ln()).abs() < 1e-14);
        assert!(m.log_prob1(&x, -1).unwrap() < -700.0);

        let point = constant(CaseMode::FixedHorizon, [-800.0, 0.0, -800.0], 0.0);
        let p = point.pmf1(&x).unwrap();
        assert_eq!(p.prob(&point.grid, 0), 1.0);
        assert_eq!(p.residual(), 0.0);
    }

    #[test]
    fn tail_conditional_cancels_class() {
        let m = constant(CaseMode::FixedHorizon, [0.3, -0.2, 0.1], (0.3f64 / 0.7).ln());
        let c = tail_conditional(&m, &dummy_features(), TailEvent::AskUp).unwrap();
        assert!((c.prob(1) - 0.3).abs() < 1e-12);
        assert!((c.prob(2) - 0.21).abs() < 1e-12);
    }

    #[test]
    fn counts_and_pmf_agreement() {
        for case in [CaseMode::FixedHorizon, CaseMode::NextMove] {
            let m = random(case, 4);
            let x = dummy_features();
            let pmf = joint_pmf(&m, &x).unwrap();
            assert!((pmf.total() - 1.0).abs() < 1e-9);
            for (y1, y2) in [(3, -2), (0, 4), (-5, 0), (0, -1)] {
                let label = JointMove::new(y1, y2);
                let (ll, count) = m.loglik_counted(&x, label).unwrap();
                let expect_class = if case == CaseMode::NextMove && y1 != 0 { 1 } else { 2 };
                if ll.is_finite() {
                    assert_eq!(count.step_calls, (y1.abs() + y2.abs()) as usize);
                    assert_eq!(count.class_calls, expect_class);
                    assert!((ll - pmf.prob(&m.grid, label).ln()).abs() < 1e-10);
                }
                assert_eq!(ll, joint_loglik(&m, &x, label).unwrap());
            }
        }
    }

    #[test]
    fn sampling_geometric_mean() {
        let m = constant(CaseMode::FixedHorizon, ALL_UP, 0.0);
        let x = dummy_features();
        let mut rng = rng_for(1, "sample");
        let n = 20_000;
        let mean = (0..n).map(|_| m.sample(&x, &mut rng).unwrap().label.y1 as f64).sum::<f64>() / n as f64;
        // Geometric(1/2): mean 2, variance 2.
        assert!((mean - 2.0).abs() < 3.0 * (2.0f64 / n as f64).sqrt());

        let never = constant(CaseMode::FixedHorizon, ALL_UP, -800.0);
        let s = never.sample(&x, &mut rng).unwrap();
        assert!(s.capped);
        assert_eq!(s.label.y1, SAMPLE_CAP);
    }
}
