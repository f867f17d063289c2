use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::DataError;
use crate::stgraph::{Point, DEFAULT_FRAME_INTERVAL};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub frame: i64,
    pub ped: i64,
    pub pos: Point,
}

/// Trajectory records with unique `(frame, ped)` pairs and uniformly spaced
/// frame ticks, kept in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryTable {
    records: Vec<Record>,
    frames: Vec<i64>,
    frame_interval: f64,
}

impl TrajectoryTable {
    pub fn new(records: Vec<Record>, frame_interval: f64) -> Result<Self, DataError> {
        Self::with_lines(records, None, frame_interval)
    }

    fn with_lines(records: Vec<Record>, lines: Option<&[usize]>, frame_interval: f64) -> Result<Self, DataError> {
        if !(frame_interval > 0.0 && frame_interval.is_finite()) {
            return Err(DataError::Config(format!("frame interval {frame_interval} must be positive")));
        }
        let mut seen = HashSet::with_capacity(records.len());
        for (k, r) in records.iter().enumerate() {
            if !seen.insert((r.frame, r.ped)) {
                return Err(DataError::Duplicate {
                    line: lines.map_or(k + 1, |l| l[k]),
                    frame: r.frame,
                    ped: r.ped,
                });
            }
        }
        let mut frames: Vec<i64> = records.iter().map(|r| r.frame).collect();
        frames.sort_unstable();
        frames.dedup();
        if let [a, b, ..] = frames[..] {
            let step = b - a;
            for w in frames.windows(2) {
                if w[1] - w[0] != step {
                    return Err(DataError::Spacing {
                        prev: w[0],
                        next: w[1],
                        step,
                    });
                }
            }
        }
        Ok(Self {
            records,
            frames,
            frame_interval,
        })
    }

    /// Parse the text format; `#` lines and blank lines are skipped.
    pub fn parse(text: &str, frame_interval: f64) -> Result<Self, DataError> {
        let mut records = Vec::new();
        let mut lines = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(DataError::Parse {
                    line: line_no,
                    message: format!("expected 4 fields `frame ped_id x y`, found {}", fields.len()),
                });
            }
            let int = |s: &str, what: &str| {
                parse_tick(s).ok_or_else(|| DataError::Parse {
                    line: line_no,
                    message: format!("{what} {s:?} is not an integer"),
                })
            };
            let real = |s: &str, what: &str| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(DataError::Parse {
                    line: line_no,
                    message: format!("{what} {s:?} is not a finite number"),
                }),
            };
            records.push(Record {
                frame: int(fields[0], "frame")?,
                ped: int(fields[1], "pedestrian id")?,
                pos: [real(fields[2], "x")?, real(fields[3], "y")?],
            });
            lines.push(line_no);
        }
        Self::with_lines(records, Some(&lines), frame_interval)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 48);
        for r in &self.records {
            let _ = writeln!(out, "{} {} {:?} {:?}", r.frame, r.ped, r.pos[0], r.pos[1]);
        }
        out
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct frame ticks in ascending order.
    pub fn frames(&self) -> &[i64] {
        &self.frames
    }

    pub fn frame_interval(&self) -> f64 {
        self.frame_interval
    }
}

/// Integer ticks; preprocessed files often write them as `780.0`.
fn parse_tick(s: &str) -> Option<i64> {
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    let v: f64 = s.parse().ok()?;
    (v.fract() == 0.0 && v.abs() < 9.0e15).then_some(v as i64)
}

pub fn load_table(path: &Path) -> Result<TrajectoryTable, DataError> {
    let text = std::fs::read_to_string(path).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    TrajectoryTable::parse(&text, DEFAULT_FRAME_INTERVAL).map_err(|e| DataError::File {
        path: path.display().to_string(),
        source: Box::new(e),
    })
}

pub fn save_table(table: &TrajectoryTable, path: &Path) -> Result<(), DataError> {
    std::fs::write(path, table.to_text()).map_err(|e| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
