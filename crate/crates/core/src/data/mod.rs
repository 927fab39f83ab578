//! Order-book states, labeling, features, synthetic data and splits.

pub mod csvio;
pub mod features;
pub mod label;
pub mod lob;
pub mod split;
pub mod stats;
pub mod synth;

pub use csvio::{ingest_events, read_labeled, write_events, write_labeled};
pub use features::{
    featureize, imbalance, imbalance_features, ladder_value, Direction, NormalizationStats, FEATURE_DIM, SPREAD_INDEX,
};
pub use label::{label_case1, label_case2, Snapshot, NANOS_PER_SECOND};
pub use lob::{remove_halts, CaseMode, JointMove, LOBState, LabeledSample, LEVELS};
pub use split::{split, DatasetSplit};
pub use stats::{comovement_stats, ComovementStats};
pub use synth::{synth_generate, PlantedLaw, SyntheticGenConfig, MAX_MOVE};
