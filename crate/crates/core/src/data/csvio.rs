//! Event and labeled-sample CSV files.
//!
//! Event header: `ts_ns,best_ask_ticks,best_bid_ticks,ask_0..ask_49,bid_0..bid_49,halted`.
//! Labeled files append `y1,y2`. All fields are integers; `halted` is 0 or 1.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::lob::{JointMove, LOBState, LabeledSample, LEVELS};

pub fn event_header() -> Vec<String> {
    let mut h = vec!["ts_ns".to_string(), "best_ask_ticks".into(), "best_bid_ticks".into()];
    h.extend((0..LEVELS).map(|i| format!("ask_{i}")));
    h.extend((0..LEVELS).map(|i| format!("bid_{i}")));
    h.push("halted".into());
    h
}

pub fn labeled_header() -> Vec<String> {
    let mut h = event_header();
    h.push("y1".into());
    h.push("y2".into());
    h
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Read an event file. Rows must be time-ordered; halted rows are kept.
pub fn ingest_events(path: &Path) -> Result<Vec<LOBState>> {
    let rows = read_rows(open(path)?, path, false)?;
    Ok(rows.into_iter().map(|(s, _)| s).collect())
}

/// Read a labeled-sample file written by [`write_labeled`].
pub fn read_labeled(path: &Path) -> Result<Vec<LabeledSample>> {
    read_labeled_from(open(path)?, path)
}

pub fn read_labeled_from<R: Read>(reader: R, path: &Path) -> Result<Vec<LabeledSample>> {
    let rows = read_rows(reader, path, true)?;
    Ok(rows
        .into_iter()
        .map(|(state, label)| LabeledSample {
            timestamp: state.timestamp,
            label: label.expect("labeled row"),
            state,
        })
        .collect())
}

pub fn read_events_from<R: Read>(reader: R, path: &Path) -> Result<Vec<LOBState>> {
    Ok(read_rows(reader, path, false)?.into_iter().map(|(s, _)| s).collect())
}

fn read_rows<R: Read>(reader: R, path: &Path, labeled: bool) -> Result<Vec<(LOBState, Option<JointMove>)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let expected = if labeled { labeled_header() } else { event_header() };
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(h) => h?,
    };
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(parse_err(1, "unexpected header".into()));
    }
    let mut out: Vec<(LOBState, Option<JointMove>)> = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != expected.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", expected.len(), rec.len()),
            ));
        }
        let int = |i: usize| -> Result<i64> {
            rec[i]
                .trim()
                .parse::<i64>()
                .map_err(|_| parse_err(line, format!("column {} is not an integer: {:?}", expected[i], &rec[i])))
        };
        let size = |i: usize| -> Result<u64> {
            let v = int(i)?;
            u64::try_from(v).map_err(|_| parse_err(line, format!("negative size {v} in column {}", expected[i])))
        };
        let ts = int(0)?;
        let ask = int(1)?;
        let bid = int(2)?;
        let ask_sizes = (3..3 + LEVELS).map(size).collect::<Result<Vec<_>>>()?;
        let bid_sizes = (3 + LEVELS..3 + 2 * LEVELS).map(size).collect::<Result<Vec<_>>>()?;
        let halted = match int(3 + 2 * LEVELS)? {
            0 => false,
            1 => true,
            v => return Err(parse_err(line, format!("halted must be 0 or 1, got {v}"))),
        };
        if ask <= bid {
            return Err(parse_err(line, format!("best ask {ask} does not exceed best bid {bid}")));
        }
        if let Some((prev, _)) = out.last() {
            if ts < prev.timestamp {
                return Err(parse_err(line, format!("timestamp {ts} precedes {}", prev.timestamp)));
            }
        }
        let label = if labeled {
            let n = 4 + 2 * LEVELS;
            Some(JointMove::new(int(n)?, int(n + 1)?))
        } else {
            None
        };
        out.push((
            LOBState {
                timestamp: ts,
                best_ask_price: ask,
                best_bid_price: bid,
                ask_sizes,
                bid_sizes,
                halted,
            },
            label,
        ));
    }
    Ok(out)
}

fn state_fields(ts: i64, s: &LOBState) -> Vec<String> {
    let mut f = Vec::with_capacity(4 + 2 * LEVELS);
    f.push(ts.to_string());
    f.push(s.best_ask_price.to_string());
    f.push(s.best_bid_price.to_string());
    f.extend(s.ask_sizes.iter().map(u64::to_string));
    f.extend(s.bid_sizes.iter().map(u64::to_string));
    f.push(if s.halted { "1" } else { "0" }.into());
    f
}

pub fn write_events_to<W: Write>(w: W, states: &[LOBState]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(event_header())?;
    for s in states {
        wtr.write_record(state_fields(s.timestamp, s))?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_events(path: &Path, states: &[LOBState]) -> Result<()> {
    write_events_to(create(path)?, states)
}

pub fn write_labeled_to<W: Write>(w: W, samples: &[LabeledSample]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(labeled_header())?;
    for s in samples {
        let mut f = state_fields(s.timestamp, &s.state);
        f.push(s.label.y1.to_string());
        f.push(s.label.y2.to_string());
        wtr.write_record(f)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_labeled(path: &Path, samples: &[LabeledSample]) -> Result<()> {
    write_labeled_to(create(path)?, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(ts: i64, k: u64) -> LOBState {
        LOBState {
            timestamp: ts,
            best_ask_price: 1001,
            best_bid_price: 1000,
            ask_sizes: (0..LEVELS as u64).map(|i| i + k).collect(),
            bid_sizes: (0..LEVELS as u64).map(|i| 2 * i + k).collect(),
            halted: k % 2 == 1,
        }
    }

    fn parse(text: &str) -> Result<Vec<LOBState>> {
        read_events_from(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn empty_file_is_empty_list() {
        assert!(parse("").unwrap().is_empty());
    }

    #[test]
    fn three_rows_round_trip() {
        let states: Vec<_> = (0..3).map(|i| state(10 * i, i as u64)).collect();
        let mut buf = Vec::new();
        write_events_to(&mut buf, &states).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), states);
    }

    #[test]
    fn negative_size_names_row() {
        let mut buf = Vec::new();
        write_events_to(&mut buf, &[state(0, 1), state(5, 2)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut fields: Vec<String> = lines[2].split(',').map(String::from).collect();
        fields[7] = "-4".into();
        lines[2] = fields.join(",");
        match parse(&lines.join("\n")) {
            Err(Error::Parse { line: 3, msg, .. }) => assert!(msg.contains("negative size")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotone_time_rejected() {
        let mut buf = Vec::new();
        write_events_to(&mut buf, &[state(10, 0), state(5, 0)]).unwrap();
        assert!(matches!(
            parse(std::str::from_utf8(&buf).unwrap()),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn labeled_round_trip() {
        let samples: Vec<_> = (0..4)
            .map(|i| LabeledSample {
                timestamp: i,
                state: state(i, 0),
                label: JointMove::new(i - 2, 1 - i),
            })
            .collect();
        let mut buf = Vec::new();
        write_labeled_to(&mut buf, &samples).unwrap();
        let back = read_labeled_from(buf.as_slice(), Path::new("mem.csv")).unwrap();
        assert_eq!(back, samples);
    }
}
