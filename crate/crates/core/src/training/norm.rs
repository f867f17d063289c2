use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::stgraph::{Point, Scene};

/// Per-axis min-max statistics mapping `[min, max]` onto `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Point,
    pub max: Point,
}

impl NormStats {
    pub fn new(min: Point, max: Point) -> Result<Self, TrainError> {
        for axis in 0..2 {
            if !(max[axis] > min[axis]) || !min[axis].is_finite() || !max[axis].is_finite() {
                return Err(TrainError::DegenerateNormalization { axis });
            }
        }
        Ok(Self { min, max })
    }

    /// Fit over every defined position of the given scenes.
    pub fn fit<'a>(scenes: impl IntoIterator<Item = &'a Scene>) -> Result<Self, TrainError> {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        let mut any = false;
        for p in scenes.into_iter().flat_map(Scene::points) {
            any = true;
            for a in 0..2 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        if !any {
            return Err(TrainError::EmptyTrainingSet);
        }
        Self::new(min, max)
    }

    /// Affine map to normalized units; values outside the fitted range are
    /// extrapolated, never clamped.
    pub fn apply(&self, p: Point) -> Point {
        let mut out = [0.0; 2];
        for a in 0..2 {
            out[a] = 2.0 * (p[a] - self.min[a]) / (self.max[a] - self.min[a]) - 1.0;
        }
        out
    }

    pub fn invert(&self, p: Point) -> Point {
        let mut out = [0.0; 2];
        for a in 0..2 {
            out[a] = (p[a] + 1.0) * 0.5 * (self.max[a] - self.min[a]) + self.min[a];
        }
        out
    }

    /// Scale factor from a normalized displacement to world units, per axis.
    pub fn half_range(&self) -> Point {
        [
            0.5 * (self.max[0] - self.min[0]),
            0.5 * (self.max[1] - self.min[1]),
        ]
    }

    pub fn normalize_scene(&self, scene: &Scene) -> Scene {
        scene.map_positions(|p| self.apply(p))
    }

    pub fn denormalize_scene(&self, scene: &Scene) -> Scene {
        scene.map_positions(|p| self.invert(p))
    }
}
