use serde::{Deserialize, Serialize};

use super::{Point, StGraphError};

/// Default sampling interval: 2.5 frames per second.
pub const DEFAULT_FRAME_INTERVAL: f64 = 0.4;

/// A fixed-rate window of multi-pedestrian positions.
///
/// `tracks[i][t]` is pedestrian `i` at step `t`, `None` where absent.
/// Steps are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    frame_interval: f64,
    ped_ids: Vec<i64>,
    tracks: Vec<Vec<Option<Point>>>,
}

impl Scene {
    pub fn new(frame_interval: f64, ped_ids: Vec<i64>, tracks: Vec<Vec<Option<Point>>>) -> Result<Self, StGraphError> {
        if ped_ids.len() != tracks.len() {
            return Err(StGraphError::InvalidScene(format!(
                "{} ids for {} tracks",
                ped_ids.len(),
                tracks.len()
            )));
        }
        if tracks.is_empty() {
            return Err(StGraphError::InvalidScene("scene has no pedestrians".into()));
        }
        let len = tracks[0].len();
        if len < 3 {
            return Err(StGraphError::InvalidScene(format!("scene length {len} is below 3 steps")));
        }
        if let Some(bad) = tracks.iter().position(|t| t.len() != len) {
            return Err(StGraphError::InvalidScene(format!(
                "track {bad} has {} steps, expected {len}",
                tracks[bad].len()
            )));
        }
        if tracks.iter().flatten().flatten().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(StGraphError::InvalidScene("non-finite position".into()));
        }
        if !(frame_interval > 0.0 && frame_interval.is_finite()) {
            return Err(StGraphError::InvalidScene(format!("frame interval {frame_interval}")));
        }
        Ok(Self {
            frame_interval,
            ped_ids,
            tracks,
        })
    }

    /// Scene in which every pedestrian is present at every step.
    pub fn from_dense(frame_interval: f64, ped_ids: Vec<i64>, tracks: Vec<Vec<Point>>) -> Result<Self, StGraphError> {
        let tracks = tracks
            .into_iter()
            .map(|t| t.into_iter().map(Some).collect())
            .collect();
        Self::new(frame_interval, ped_ids, tracks)
    }

    pub fn frame_interval(&self) -> f64 {
        self.frame_interval
    }

    pub fn ped_ids(&self) -> &[i64] {
        &self.ped_ids
    }

    pub fn num_peds(&self) -> usize {
        self.tracks.len()
    }

    pub fn len(&self) -> usize {
        self.tracks[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tracks(&self) -> &[Vec<Option<Point>>] {
        &self.tracks
    }

    pub fn position(&self, ped: usize, step: usize) -> Option<Point> {
        self.tracks.get(ped)?.get(step).copied().flatten()
    }

    pub fn is_present(&self, ped: usize, step: usize) -> bool {
        self.position(ped, step).is_some()
    }

    pub fn present_over(&self, ped: usize, steps: std::ops::Range<usize>) -> bool {
        steps.into_iter().all(|t| self.is_present(ped, t))
    }

    pub fn fully_present(&self, ped: usize) -> bool {
        self.present_over(ped, 0..self.len())
    }

    /// Apply `f` to every defined position.
    pub fn map_positions(&self, f: impl Fn(Point) -> Point) -> Self {
        Self {
            frame_interval: self.frame_interval,
            ped_ids: self.ped_ids.clone(),
            tracks: self
                .tracks
                .iter()
                .map(|t| t.iter().map(|p| p.map(&f)).collect())
                .collect(),
        }
    }

    pub fn translated(&self, offset: Point) -> Self {
        self.map_positions(|p| [p[0] + offset[0], p[1] + offset[1]])
    }

    /// Keep only the listed pedestrians, in the given order.
    pub fn select(&self, peds: &[usize]) -> Result<Self, StGraphError> {
        Self::new(
            self.frame_interval,
            peds.iter().map(|&i| self.ped_ids[i]).collect(),
            peds.iter().map(|&i| self.tracks[i].clone()).collect(),
        )
    }

    /// Same pedestrians over the first `len` steps.
    pub fn truncated(&self, len: usize) -> Result<Self, StGraphError> {
        Self::new(
            self.frame_interval,
            self.ped_ids.clone(),
            self.tracks.iter().map(|t| t[..len.min(t.len())].to_vec()).collect(),
        )
    }

    /// Replace one position (or erase it with `None`).
    pub fn set_position(&mut self, ped: usize, step: usize, value: Option<Point>) {
        self.tracks[ped][step] = value;
    }

    /// Every defined position in track order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.tracks.iter().flatten().flatten().copied()
    }
}
