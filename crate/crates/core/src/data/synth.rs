use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::DataError;
use crate::stgraph::{Point, Scene, DEFAULT_FRAME_INTERVAL};

/// Distance over which the repulsion decays by a factor of e.
const REPULSION_RANGE: f64 = 0.5;
/// Largest repulsive displacement a pedestrian receives in one step.
const REPULSION_CAP: f64 = 0.2;
const LANE_SPACING: f64 = 1.5;
const GROUP_SPACING: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Two groups on perpendicular courses meeting mid-scene.
    Crossing,
    /// A fast walker catching a slow one on the same line, one pair per lane.
    Overtaking,
    /// Everyone walking together in a loose formation.
    ParallelGroup,
    /// Half the crowd stands still while the rest walk through it.
    StationaryMix,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Self::Crossing, Self::Overtaking, Self::ParallelGroup, Self::StationaryMix];

    fn index(self) -> u64 {
        self as u64
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Crossing => "crossing",
            Self::Overtaking => "overtaking",
            Self::ParallelGroup => "parallel_group",
            Self::StationaryMix => "stationary_mix",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| DataError::Synth(format!("unknown scenario {s:?} (crossing|overtaking|parallel_group|stationary_mix)")))
    }
}

/// Synthetic corpus description, written `name:key=val,...`.
///
/// Keys: `n` pedestrians per scene, `scenes`, `speed_min`/`speed_max` in
/// units per step, `noise` (jitter standard deviation), `repulsion`
/// (strength, 0 disables), `seed`, `len` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub scenario: Scenario,
    pub peds: usize,
    pub scenes: usize,
    pub speed_min: f64,
    pub speed_max: f64,
    pub noise: f64,
    pub repulsion: f64,
    pub seed: u64,
    pub len: usize,
}

impl SynthSpec {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            peds: 4,
            scenes: 100,
            speed_min: 0.2,
            speed_max: 0.6,
            noise: 0.02,
            repulsion: 0.15,
            seed: 0,
            len: 20,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::Synth(m));
        if self.peds == 0 || self.scenes == 0 {
            return bad(format!("need n >= 1 and scenes >= 1, got n={} scenes={}", self.peds, self.scenes));
        }
        if !(self.speed_min > 0.0 && self.speed_min <= self.speed_max && self.speed_max.is_finite()) {
            return bad(format!("speed range {}..{} must satisfy 0 < min <= max", self.speed_min, self.speed_max));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) || !(self.repulsion >= 0.0 && self.repulsion.is_finite()) {
            return bad(format!("noise {} and repulsion {} must be >= 0", self.noise, self.repulsion));
        }
        if self.len < 3 {
            return bad(format!("len {} is below 3 steps", self.len));
        }
        Ok(())
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:n={},scenes={},speed_min={},speed_max={},noise={},repulsion={},seed={},len={}",
            self.scenario,
            self.peds,
            self.scenes,
            self.speed_min,
            self.speed_max,
            self.noise,
            self.repulsion,
            self.seed,
            self.len
        )
    }
}

impl FromStr for SynthSpec {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut spec = Self::new(name.parse()?);
        for field in rest.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| DataError::Synth(format!("expected key=value, found {field:?}")))?;
            let num_err = || DataError::Synth(format!("bad value {value:?} for {key}"));
            let int = || value.parse::<usize>().map_err(|_| num_err());
            let real = || value.parse::<f64>().map_err(|_| num_err());
            match key {
                "n" | "peds" => spec.peds = int()?,
                "scenes" => spec.scenes = int()?,
                "speed_min" => spec.speed_min = real()?,
                "speed_max" => spec.speed_max = real()?,
                "noise" => spec.noise = real()?,
                "repulsion" => spec.repulsion = real()?,
                "seed" => spec.seed = value.parse().map_err(|_| num_err())?,
                "len" => spec.len = int()?,
                _ => return Err(DataError::Synth(format!("unknown key {key:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Parse `spec+spec+...`.
pub fn parse_synth_list(s: &str) -> Result<Vec<SynthSpec>, DataError> {
    s.split('+').map(str::parse).collect()
}

pub fn generate_all(specs: &[SynthSpec]) -> Result<Vec<Scene>, DataError> {
    let mut out = Vec::new();
    for spec in specs {
        out.extend(generate(spec)?);
    }
    Ok(out)
}

/// Every scene is a pure function of the spec and its index.
pub fn generate(spec: &SynthSpec) -> Result<Vec<Scene>, DataError> {
    spec.validate()?;
    (0..spec.scenes)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream((spec.scenario.index() << 32) | k as u64);
            generate_scene(spec, &mut rng)
        })
        .collect()
}

struct Walker {
    start: Point,
    velocity: Point,
    frozen: bool,
}

fn layout(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<Walker> {
    let n = spec.peds;
    let mid = (spec.len - 1) as f64 / 2.0;
    let speed = |rng: &mut ChaCha8Rng| rng.random_range(spec.speed_min..=spec.speed_max);
    let offset = |k: usize, m: usize, spacing: f64| (k as f64 - (m as f64 - 1.0) / 2.0) * spacing;
    let walk = |along: Point, lateral: Point, v: f64, o: f64| Walker {
        start: [-along[0] * v * mid + lateral[0] * o, -along[1] * v * mid + lateral[1] * o],
        velocity: [along[0] * v, along[1] * v],
        frozen: false,
    };
    match spec.scenario {
        Scenario::Crossing => {
            let a = n.div_ceil(2);
            let b = n - a;
            let mut out: Vec<Walker> = (0..a)
                .map(|k| walk([1.0, 0.0], [0.0, 1.0], speed(rng), offset(k, a, GROUP_SPACING)))
                .collect();
            out.extend((0..b).map(|k| walk([0.0, 1.0], [1.0, 0.0], speed(rng), offset(k, b, GROUP_SPACING))));
            out
        }
        Scenario::Overtaking => {
            let lanes = n.div_ceil(2);
            let quarter = 0.25 * (spec.speed_max - spec.speed_min);
            let mut out = Vec::with_capacity(n);
            for lane in 0..lanes {
                let o = offset(lane, lanes, LANE_SPACING);
                if out.len() + 1 == n {
                    out.push(walk([1.0, 0.0], [0.0, 1.0], speed(rng), o));
                    break;
                }
                let slow = spec.speed_min + rng.random_range(0.0..=quarter);
                let fast = spec.speed_max - rng.random_range(0.0..=quarter);
                out.push(walk([1.0, 0.0], [0.0, 1.0], slow, o));
                out.push(walk([1.0, 0.0], [0.0, 1.0], fast, o));
            }
            out
        }
        Scenario::ParallelGroup => {
            let v = speed(rng);
            let cols = n.min(2);
            let rows = n.div_ceil(cols);
            (0..n)
                .map(|k| {
                    let (row, col) = (k / cols, k % cols);
                    let mut w = walk([1.0, 0.0], [0.0, 1.0], v + rng.random_range(-0.02..=0.02), offset(col, cols, GROUP_SPACING));
                    w.start[0] += offset(row, rows, GROUP_SPACING);
                    w
                })
                .collect()
        }
        Scenario::StationaryMix => {
            let still = n / 2;
            let mut out: Vec<Walker> = (0..still)
                .map(|_| Walker {
                    start: [rng.random_range(-1.5..=1.5), rng.random_range(-1.5..=1.5)],
                    velocity: [0.0, 0.0],
                    frozen: true,
                })
                .collect();
            for _ in still..n {
                let phi = rng.random_range(0.0..TAU);
                let dir = [phi.cos(), phi.sin()];
                let v = speed(rng);
                out.push(walk(dir, [-dir[1], dir[0]], v, rng.random_range(-1.0..=1.0)));
            }
            out
        }
    }
}

fn generate_scene(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Scene, DataError> {
    let walkers = layout(spec, rng);
    let theta = rng.random_range(0.0..TAU);
    let center = [rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0)];
    let mut tracks = simulate(&walkers, spec.repulsion, spec.len);
    let (sin, cos) = theta.sin_cos();
    let jitter = Normal::new(0.0, spec.noise).map_err(|e| DataError::Synth(e.to_string()))?;
    for track in &mut tracks {
        for p in track.iter_mut() {
            let q = [cos * p[0] - sin * p[1] + center[0], sin * p[0] + cos * p[1] + center[1]];
            *p = if spec.noise > 0.0 {
                [q[0] + jitter.sample(rng), q[1] + jitter.sample(rng)]
            } else {
                q
            };
        }
    }
    Ok(Scene::from_dense(DEFAULT_FRAME_INTERVAL, (0..spec.peds as i64).collect(), tracks)?)
}

/// Constant-velocity walkers pushed apart by a capped repulsion computed
/// from the previous step's positions of everyone at once.
fn simulate(walkers: &[Walker], strength: f64, len: usize) -> Vec<Vec<Point>> {
    let n = walkers.len();
    let mut tracks: Vec<Vec<Point>> = walkers.iter().map(|w| vec![w.start]).collect();
    for t in 1..len {
        let prev: Vec<Point> = tracks.iter().map(|tr| tr[t - 1]).collect();
        for (i, w) in walkers.iter().enumerate() {
            let mut p = prev[i];
            if !w.frozen {
                let mut push = [0.0; 2];
                if strength > 0.0 {
                    for j in (0..n).filter(|&j| j != i) {
                        let d = [prev[i][0] - prev[j][0], prev[i][1] - prev[j][1]];
                        let dist = d[0].hypot(d[1]);
                        if dist > 0.0 {
                            let m = strength * (-dist / REPULSION_RANGE).exp() / dist;
                            push[0] += m * d[0];
                            push[1] += m * d[1];
                        }
                    }
                    let norm = push[0].hypot(push[1]);
                    if norm > REPULSION_CAP {
                        push = [push[0] * REPULSION_CAP / norm, push[1] * REPULSION_CAP / norm];
                    }
                }
                p = [p[0] + w.velocity[0] + push[0], p[1] + w.velocity[1] + push[1]];
            }
            tracks[i].push(p);
        }
    }
    tracks
}

#[cfg(test)]
pub(crate) fn head_on(strength: f64) -> Vec<Vec<Point>> {
    let walkers = [
        Walker {
            start: [-4.5, 0.0],
            velocity: [0.5, 0.0],
            frozen: false,
        },
        Walker {
            start: [4.5, 0.05],
            velocity: [-0.5, 0.0],
            frozen: false,
        },
    ];
    simulate(&walkers, strength, 20)
}
