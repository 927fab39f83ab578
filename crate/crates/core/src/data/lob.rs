use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of recorded price levels per side.
pub const LEVELS: usize = 50;

/// One order-book snapshot: sizes at the first 50 nonzero levels of each side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LOBState {
    /// Nanoseconds since the epoch.
    pub timestamp: i64,
    pub best_ask_price: i64,
    pub best_bid_price: i64,
    pub ask_sizes: Vec<u64>,
    pub bid_sizes: Vec<u64>,
    pub halted: bool,
}

impl LOBState {
    pub fn spread(&self) -> i64 {
        self.best_ask_price - self.best_bid_price
    }

    pub fn validate(&self) -> Result<()> {
        if self.ask_sizes.len() != LEVELS || self.bid_sizes.len() != LEVELS {
            return Err(Error::arg(
                "LOBState",
                format!(
                    "expected {LEVELS} levels per side, got {} ask and {} bid",
                    self.ask_sizes.len(),
                    self.bid_sizes.len()
                ),
            ));
        }
        if self.best_ask_price <= self.best_bid_price {
            return Err(Error::arg(
                "LOBState",
                format!(
                    "best ask {} must exceed best bid {}",
                    self.best_ask_price, self.best_bid_price
                ),
            ));
        }
        Ok(())
    }
}

/// Change in best ask (`y1`) and best bid (`y2`), in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointMove {
    pub y1: i64,
    pub y2: i64,
}

impl JointMove {
    pub const fn new(y1: i64, y2: i64) -> Self {
        Self { y1, y2 }
    }

    pub fn is_zero(&self) -> bool {
        self.y1 == 0 && self.y2 == 0
    }

    pub fn get(&self, component: usize) -> i64 {
        match component {
            1 => self.y1,
            2 => self.y2,
            _ => panic!("component must be 1 or 2"),
        }
    }
}

/// A state paired with the move that followed it.
///
/// Features are derived from `state` on demand, since the normalization depends
/// on the training split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSample {
    /// Time at which the prediction is made.
    pub timestamp: i64,
    pub state: LOBState,
    pub label: JointMove,
}

/// Labeling regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum CaseMode {
    /// Fixed horizon: the move over the next `dt`.
    FixedHorizon,
    /// The next change of either best price.
    NextMove,
}

impl CaseMode {
    pub fn number(self) -> u8 {
        match self {
            CaseMode::FixedHorizon => 1,
            CaseMode::NextMove => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(CaseMode::FixedHorizon),
            2 => Ok(CaseMode::NextMove),
            _ => Err(Error::InvalidConfig(format!("case must be 1 or 2, got {n}"))),
        }
    }
}

impl From<CaseMode> for u8 {
    fn from(c: CaseMode) -> u8 {
        c.number()
    }
}

impl TryFrom<u8> for CaseMode {
    type Error = Error;
    fn try_from(n: u8) -> Result<Self> {
        CaseMode::from_number(n)
    }
}

/// Drop halted states, keeping order.
pub fn remove_halts(states: Vec<LOBState>) -> Vec<LOBState> {
    states.into_iter().filter(|s| !s.halted).collect()
}
