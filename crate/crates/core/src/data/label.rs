use serde::{Deserialize, Serialize};

use super::lob::{JointMove, LOBState, LabeledSample};

pub const NANOS_PER_SECOND: i64 = 1_000_000_000;

/// When fixed-horizon snapshots are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Snapshot {
    /// Every `period` nanoseconds starting at the first event.
    Clock { period_ns: i64 },
    /// At every event.
    EveryEvent,
}

impl Default for Snapshot {
    fn default() -> Self {
        Snapshot::Clock {
            period_ns: NANOS_PER_SECOND,
        }
    }
}

/// Index of the last state with `timestamp <= t`, if any.
fn state_at(states: &[LOBState], t: i64) -> Option<usize> {
    states.partition_point(|s| s.timestamp <= t).checked_sub(1)
}

fn sample(state: &LOBState, t: i64, label: JointMove) -> LabeledSample {
    let mut state = state.clone();
    state.timestamp = t;
    LabeledSample {
        timestamp: t,
        state,
        label,
    }
}

/// Fixed-horizon labels: the change of each best price between `t` and `t + dt`.
///
/// The book is piecewise constant between events, so the state at any time is
/// the last event at or before it. Snapshots whose horizon extends past the
/// final event are dropped.
pub fn label_case1(states: &[LOBState], dt_ns: i64, snapshot: Snapshot) -> Vec<LabeledSample> {
    let (Some(first), Some(last)) = (states.first(), states.last()) else {
        return Vec::new();
    };
    let times: Vec<i64> = match snapshot {
        Snapshot::Clock { period_ns } => {
            let period = period_ns.max(1);
            (0..)
                .map(|k| first.timestamp + k * period)
                .take_while(|&t| t + dt_ns <= last.timestamp)
                .collect()
        }
        Snapshot::EveryEvent => states
            .iter()
            .map(|s| s.timestamp)
            .filter(|&t| t + dt_ns <= last.timestamp)
            .collect(),
    };
    times
        .into_iter()
        .filter_map(|t| {
            let now = &states[state_at(states, t)?];
            let later = &states[state_at(states, t + dt_ns)?];
            let label = JointMove::new(
                later.best_ask_price - now.best_ask_price,
                later.best_bid_price - now.best_bid_price,
            );
            Some(sample(now, t, label))
        })
        .collect()
}

/// Next-move labels: one sample per change of either best price, with features
/// taken at the previous change (or the first event).
pub fn label_case2(states: &[LOBState]) -> Vec<LabeledSample> {
    let mut out = Vec::new();
    let Some(mut cur) = states.first() else {
        return out;
    };
    for s in &states[1..] {
        if s.best_ask_price != cur.best_ask_price || s.best_bid_price != cur.best_bid_price {
            let label = JointMove::new(
                s.best_ask_price - cur.best_ask_price,
                s.best_bid_price - cur.best_bid_price,
            );
            out.push(sample(cur, cur.timestamp, label));
            cur = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::lob::LEVELS;

    fn st(ts: i64, ask: i64, bid: i64) -> LOBState {
        LOBState {
            timestamp: ts,
            best_ask_price: ask,
            best_bid_price: bid,
            ask_sizes: vec![1; LEVELS],
            bid_sizes: vec![1; LEVELS],
            halted: false,
        }
    }

    const S: i64 = NANOS_PER_SECOND;

    #[test]
    fn constant_book_labels_zero() {
        let states = vec![st(0, 101, 100), st(S / 2, 101, 100), st(2 * S, 101, 100)];
        let out = label_case1(&states, S, Snapshot::default());
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|s| s.label.is_zero()));
    }

    #[test]
    fn ask_rise_within_horizon() {
        let states = vec![st(0, 101, 100), st(S / 2, 102, 100), st(S, 102, 100)];
        let out = label_case1(&states, S, Snapshot::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, JointMove::new(1, 0));
        assert_eq!(out[0].timestamp, 0);
    }

    #[test]
    fn scripted_path_every_event() {
        let asks = [101, 103, 102, 102, 105, 104];
        let bids = [100, 100, 101, 99, 99, 103];
        let states: Vec<_> = (0..6).map(|i| st(i as i64 * S, asks[i], bids[i])).collect();
        let out = label_case1(&states, S, Snapshot::EveryEvent);
        assert_eq!(out.len(), 5);
        for (i, s) in out.iter().enumerate() {
            assert_eq!(s.label, JointMove::new(asks[i + 1] - asks[i], bids[i + 1] - bids[i]));
        }
        // Horizon of two seconds on a one-second clock.
        let out = label_case1(&states, 2 * S, Snapshot::default());
        assert_eq!(out.len(), 4);
        assert_eq!(out[1].label, JointMove::new(asks[3] - asks[1], bids[3] - bids[1]));
    }

    #[test]
    fn next_move_cases() {
        let states = vec![st(0, 100, 99), st(1, 100, 99), st(2, 101, 99)];
        let out = label_case2(&states);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].label, JointMove::new(1, 0));

        let flat: Vec<_> = (0..5).map(|i| st(i, 100, 99)).collect();
        assert!(label_case2(&flat).is_empty());
        assert!(label_case2(&[]).is_empty());
    }

    #[test]
    fn scripted_five_moves() {
        let script = [(1, 0), (0, -2), (-1, 1), (3, 3), (0, 1)];
        let mut states = vec![st(0, 110, 100)];
        let (mut a, mut b) = (110, 100);
        for (k, (da, db)) in script.iter().enumerate() {
            states.push(st(10 * k as i64 + 5, a, b));
            a += da;
            b += db;
            states.push(st(10 * k as i64 + 10, a, b));
        }
        let out = label_case2(&states);
        assert_eq!(out.len(), 5);
        for (s, (da, db)) in out.iter().zip(script) {
            assert_eq!(s.label, JointMove::new(da, db));
            assert!(!s.label.is_zero());
        }
        assert_eq!(out[1].timestamp, 10);
    }
}
