//! Spatial neural networks for joint best-ask/best-bid price moves in a limit
//! order book, with naive, logistic and standard-network baselines, synthetic
//! data with a planted ground truth, evaluation metrics and numerical checks of
//! tail well-posedness.

pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod nncore;
pub mod seed;
pub mod wellposed;

pub use error::{Error, Result};
