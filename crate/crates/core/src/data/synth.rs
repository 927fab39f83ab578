//! Synthetic order-book samples drawn from a planted local model.
//!
//! Every level of both sides holds `round(LogNormal(size_mu, size_sigma))`
//! shares. The move class of the best ask is a softmax in the best-level
//! imbalance. Given an up move, the magnitude follows the hazard
//! `P[Y = y | Y >= y] = sigmoid(a + b * x_y)` where `x_y` is the standardized log
//! size (or raw size) `y` levels up the ask side; down moves read the bid side. Magnitudes stop at
//! 50 levels, which absorbs the remaining mass.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nncore::activation::sigmoid;
use crate::nncore::ops::{log_continue_probability, log_step_probability, softmax};
use crate::seed;

use super::features::{imbalance, Direction};
use super::label::NANOS_PER_SECOND;
use super::lob::{CaseMode, JointMove, LOBState, LabeledSample, LEVELS};

/// Largest magnitude the generator emits.
pub const MAX_MOVE: i64 = 50;

/// Move classes in `[up, same, down]` order.
pub const CLASS_UP: usize = 0;
pub const CLASS_SAME: usize = 1;
pub const CLASS_DOWN: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticGenConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub law: PlantedLaw,
    /// `spread_probs[i]` is the probability of a spread of `i + 1` ticks.
    pub spread_probs: Vec<f64>,
    pub base_bid: i64,
    pub start_ns: i64,
    pub interval_ns: i64,
}

impl Default for SyntheticGenConfig {
    fn default() -> Self {
        Self {
            n_samples: 200_000,
            seed: 0,
            law: PlantedLaw::default(),
            spread_probs: vec![0.7, 0.2, 0.1],
            base_bid: 100_000,
            start_ns: 1_420_070_400 * NANOS_PER_SECOND,
            interval_ns: NANOS_PER_SECOND,
        }
    }
}

/// The generating law; serialized as the ground-truth file and used as an exact
/// likelihood oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedLaw {
    pub case: CaseMode,
    pub size_mu: f64,
    pub size_sigma: f64,
    /// Hazard intercept.
    pub a: f64,
    /// Hazard coefficient on the standardized size at the candidate level.
    pub b: f64,
    /// Standardize `ln(size)` rather than the size itself.
    pub log_sizes: bool,
    /// Class logits `c_k + w_k * imbalance` for `[up, same, down]`.
    pub class_intercept: [f64; 3],
    pub class_slope: [f64; 3],
    /// Next-move case: `P[y2 > 0 | y1 = 0] = sigmoid(c + w * imbalance)`.
    pub bid_dir_intercept: f64,
    pub bid_dir_slope: f64,
    /// Fixed-horizon case: probability that the bid copies the ask move.
    pub lockstep: f64,
}

impl Default for PlantedLaw {
    fn default() -> Self {
        Self {
            case: CaseMode::NextMove,
            size_mu: 4.0,
            size_sigma: 0.6,
            a: 0.0,
            b: 2.5,
            log_sizes: true,
            class_intercept: [0.0, 0.0, 0.0],
            class_slope: [2.5, 0.0, -2.5],
            bid_dir_intercept: 0.0,
            bid_dir_slope: 2.5,
            lockstep: 0.5,
        }
    }
}

impl SyntheticGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be positive".into()));
        }
        if self.spread_probs.is_empty()
            || self.spread_probs.iter().any(|p| !(*p >= 0.0))
            || (self.spread_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidConfig("spread_probs must be a probability vector".into()));
        }
        if self.interval_ns <= 0 {
            return Err(Error::InvalidConfig("interval_ns must be positive".into()));
        }
        self.law.validate()
    }
}

impl PlantedLaw {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.size_mu, self.size_sigma, self.a, self.b, self.bid_dir_intercept, self.bid_dir_slope]
            .iter()
            .chain(&self.class_intercept)
            .chain(&self.class_slope)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("planted law coefficients must be finite".into()));
        }
        if self.size_sigma <= 0.0 {
            return Err(Error::InvalidConfig("size_sigma must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.lockstep) {
            return Err(Error::InvalidConfig("lockstep must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Mean and standard deviation of the size distribution.
    pub fn size_moments(&self) -> (f64, f64) {
        let s2 = self.size_sigma * self.size_sigma;
        let mean = (self.size_mu + 0.5 * s2).exp();
        (mean, mean * (s2.exp() - 1.0).sqrt())
    }

    pub fn standardized(&self, size: u64) -> f64 {
        if self.log_sizes {
            return ((size.max(1) as f64).ln() - self.size_mu) / self.size_sigma;
        }
        let (m, sd) = self.size_moments();
        (size as f64 - m) / sd
    }

    /// `P[Y = y | Y >= y]` for a move of at least `y` levels, `1 <= y < 50`.
    pub fn hazard_logit(&self, state: &LOBState, dir: Direction, y: i64) -> f64 {
        let sizes = match dir {
            Direction::Up => &state.ask_sizes,
            Direction::Down => &state.bid_sizes,
        };
        self.a + self.b * self.standardized(sizes[y as usize])
    }

    pub fn hazard(&self, state: &LOBState, dir: Direction, y: i64) -> f64 {
        sigmoid(self.hazard_logit(state, dir, y))
    }

    /// `log P[|Y| = y | direction]` for `1 <= y <= 50`.
    pub fn magnitude_log_pmf(&self, state: &LOBState, dir: Direction, y: i64) -> f64 {
        if !(1..=MAX_MOVE).contains(&y) {
            return f64::NEG_INFINITY;
        }
        let mut lp = 0.0;
        for k in 1..y {
            lp += log_continue_probability(self.hazard_logit(state, dir, k));
        }
        if y < MAX_MOVE {
            lp += log_step_probability(self.hazard_logit(state, dir, y));
        }
        lp
    }

    pub fn best_imbalance(state: &LOBState) -> f64 {
        imbalance(state.ask_sizes[0], state.bid_sizes[0])
    }

    pub fn class_probs(&self, state: &LOBState) -> [f64; 3] {
        let i0 = Self::best_imbalance(state);
        let z: Vec<f64> = (0..3).map(|k| self.class_intercept[k] + self.class_slope[k] * i0).collect();
        let p = softmax(&z).expect("finite logits");
        [p[0], p[1], p[2]]
    }

    /// Probability that the bid moves up given the ask did not move (next-move case).
    pub fn bid_up_prob(&self, state: &LOBState) -> f64 {
        sigmoid(self.bid_dir_intercept + self.bid_dir_slope * Self::best_imbalance(state))
    }

    /// `log P[y]` for one component drawn from the class-then-magnitude law.
    fn component_log_prob(&self, state: &LOBState, y: i64) -> f64 {
        let p = self.class_probs(state);
        match Direction::of(y) {
            None => p[CLASS_SAME].ln(),
            Some(Direction::Up) => p[CLASS_UP].ln() + self.magnitude_log_pmf(state, Direction::Up, y),
            Some(Direction::Down) => p[CLASS_DOWN].ln() + self.magnitude_log_pmf(state, Direction::Down, -y),
        }
    }

    /// Exact conditional log-likelihood of `label` given `state`; `-inf` outside the support.
    pub fn log_prob(&self, state: &LOBState, label: JointMove) -> f64 {
        let (y1, y2) = (label.y1, label.y2);
        if y1.abs() > MAX_MOVE || y2.abs() > MAX_MOVE {
            return f64::NEG_INFINITY;
        }
        let l1 = self.component_log_prob(state, y1);
        match self.case {
            CaseMode::NextMove => {
                if y1 != 0 {
                    if y2 == 0 {
                        l1
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    let pu = self.bid_up_prob(state);
                    match Direction::of(y2) {
                        None => f64::NEG_INFINITY,
                        Some(Direction::Up) => l1 + pu.ln() + self.magnitude_log_pmf(state, Direction::Up, y2),
                        Some(Direction::Down) => {
                            l1 + (1.0 - pu).ln() + self.magnitude_log_pmf(state, Direction::Down, -y2)
                        }
                    }
                }
            }
            CaseMode::FixedHorizon => {
                let indep = (1.0 - self.lockstep) * self.component_log_prob(state, y2).exp();
                let copy = if y1 == y2 { self.lockstep } else { 0.0 };
                l1 + (indep + copy).ln()
            }
        }
    }

    fn draw_magnitude<R: Rng + ?Sized>(&self, state: &LOBState, dir: Direction, rng: &mut R) -> i64 {
        for y in 1..MAX_MOVE {
            if rng.random::<f64>() < self.hazard(state, dir, y) {
                return y;
            }
        }
        MAX_MOVE
    }

    fn draw_component<R: Rng + ?Sized>(&self, state: &LOBState, rng: &mut R) -> i64 {
        let p = self.class_probs(state);
        let u: f64 = rng.random();
        if u < p[CLASS_UP] {
            self.draw_magnitude(state, Direction::Up, rng)
        } else if u < p[CLASS_UP] + p[CLASS_SAME] {
            0
        } else {
            -self.draw_magnitude(state, Direction::Down, rng)
        }
    }

    /// Draw a label for `state`.
    pub fn sample<R: Rng + ?Sized>(&self, state: &LOBState, rng: &mut R) -> JointMove {
        let y1 = self.draw_component(state, rng);
        let y2 = match self.case {
            CaseMode::NextMove => {
                if y1 != 0 {
                    0
                } else if rng.random::<f64>() < self.bid_up_prob(state) {
                    self.draw_magnitude(state, Direction::Up, rng)
                } else {
                    -self.draw_magnitude(state, Direction::Down, rng)
                }
            }
            CaseMode::FixedHorizon => {
                if rng.random::<f64>() < self.lockstep {
                    y1
                } else {
                    self.draw_component(state, rng)
                }
            }
        };
        JointMove::new(y1, y2)
    }
}

/// Draw a book whose levels are independent log-normal sizes.
pub fn draw_state<R: Rng + ?Sized>(cfg: &SyntheticGenConfig, ts: i64, rng: &mut R) -> LOBState {
    let dist = LogNormal::new(cfg.law.size_mu, cfg.law.size_sigma).expect("validated sigma");
    let mut size = || dist.sample(rng).round() as u64;
    let ask_sizes: Vec<u64> = (0..LEVELS).map(|_| size()).collect();
    let bid_sizes: Vec<u64> = (0..LEVELS).map(|_| size()).collect();
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut spread = cfg.spread_probs.len() as i64;
    for (i, p) in cfg.spread_probs.iter().enumerate() {
        acc += p;
        if u < acc {
            spread = i as i64 + 1;
            break;
        }
    }
    LOBState {
        timestamp: ts,
        best_ask_price: cfg.base_bid + spread,
        best_bid_price: cfg.base_bid,
        ask_sizes,
        bid_sizes,
        halted: false,
    }
}

/// Generate `n_samples` i.i.d. labeled samples at increasing timestamps.
pub fn synth_generate(cfg: &SyntheticGenConfig) -> Result<(Vec<LabeledSample>, PlantedLaw)> {
    cfg.validate()?;
    let mut rng: ChaCha8Rng = seed::rng_for(cfg.seed, "synth");
    let samples = (0..cfg.n_samples)
        .map(|i| {
            let ts = cfg.start_ns + i as i64 * cfg.interval_ns;
            let state = draw_state(cfg, ts, &mut rng);
            let label = cfg.law.sample(&state, &mut rng);
            LabeledSample {
                timestamp: ts,
                state,
                label,
            }
        })
        .collect();
    Ok((samples, cfg.law.clone()))
}
