use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::{load_table, DataError, TrajectoryTable};
use crate::stgraph::{Point, Scene};

pub const DEFAULT_STRIDE: usize = 10;

/// Presence filter applied inside each window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowMode {
    /// Keep pedestrians present at every step of the window.
    Training,
    /// Keep pedestrians present over the observed steps.
    Inference,
}

/// Sliding windows of `obs + pred` consecutive frames, starting every
/// `stride` frames. Windows left without a qualifying pedestrian are dropped;
/// a table shorter than one window yields nothing.
pub fn window_scenes(
    table: &TrajectoryTable,
    obs: usize,
    pred: usize,
    stride: usize,
    mode: WindowMode,
) -> Result<Vec<Scene>, DataError> {
    if stride == 0 || obs < 2 || pred == 0 {
        return Err(DataError::Config(format!(
            "window needs stride >= 1, obs >= 2, pred >= 1 (got {stride}, {obs}, {pred})"
        )));
    }
    let needed = match mode {
        WindowMode::Training => obs + pred,
        WindowMode::Inference => obs,
    };
    windows(table, obs + pred, needed, stride)
}

/// Windows of `len` frames keeping pedestrians present over the first
/// `needed` steps.
fn windows(table: &TrajectoryTable, len: usize, needed: usize, stride: usize) -> Result<Vec<Scene>, DataError> {
    let frames = table.frames();
    if frames.len() < len {
        return Ok(Vec::new());
    }
    let index: BTreeMap<i64, usize> = frames.iter().enumerate().map(|(k, &f)| (f, k)).collect();
    let mut by_ped: BTreeMap<i64, Vec<(usize, Point)>> = BTreeMap::new();
    for r in table.records() {
        by_ped.entry(r.ped).or_default().push((index[&r.frame], r.pos));
    }
    let mut scenes = Vec::new();
    let mut start = 0;
    while start + len <= frames.len() {
        let mut ids = Vec::new();
        let mut tracks = Vec::new();
        for (&ped, samples) in &by_ped {
            let mut track = vec![None; len];
            for &(k, p) in samples {
                if (start..start + len).contains(&k) {
                    track[k - start] = Some(p);
                }
            }
            if track[..needed].iter().all(Option::is_some) {
                ids.push(ped);
                tracks.push(track);
            }
        }
        if !ids.is_empty() {
            scenes.push(Scene::new(table.frame_interval(), ids, tracks)?);
        }
        start += stride;
    }
    Ok(scenes)
}

/// Windows for prediction: full `obs + pred` windows with observed-period
/// presence, or, for a table shorter than that but at least `obs` frames
/// long, one window over all of it with the truth cut short.
pub fn observation_windows(
    table: &TrajectoryTable,
    obs: usize,
    pred: usize,
    stride: usize,
) -> Result<Vec<Scene>, DataError> {
    if stride == 0 || obs < 2 || pred == 0 {
        return Err(DataError::Config(format!(
            "window needs stride >= 1, obs >= 2, pred >= 1 (got {stride}, {obs}, {pred})"
        )));
    }
    let frames = table.frames().len();
    if frames >= obs + pred {
        return window_scenes(table, obs, pred, stride, WindowMode::Inference);
    }
    if frames < obs.max(3) {
        return Err(DataError::Config(format!("{frames} frames is shorter than the {obs} observed steps")));
    }
    windows(table, frames, obs, stride)
}

/// Windows from a single file or every `.txt` file below a directory,
/// in path order.
pub fn load_scenes(
    path: &Path,
    obs: usize,
    pred: usize,
    stride: usize,
    mode: WindowMode,
) -> Result<Vec<Scene>, DataError> {
    let mut scenes = Vec::new();
    for f in trajectory_files(path)? {
        scenes.extend(window_scenes(&load_table(&f)?, obs, pred, stride, mode)?);
    }
    Ok(scenes)
}

/// `path` itself if it is a file, else every `.txt` file below it, sorted.
pub fn trajectory_files(path: &Path) -> Result<Vec<PathBuf>, DataError> {
    let mut files = Vec::new();
    collect_files(path, &mut files)?;
    if files.is_empty() {
        return Err(DataError::Io {
            path: path.display().to_string(),
            message: "no .txt trajectory files found".into(),
        });
    }
    Ok(files)
}

fn collect_files(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), DataError> {
    let io = |e: std::io::Error| DataError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if path.is_file() {
        out.push(path.to_path_buf());
        return Ok(());
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    entries.sort();
    for e in entries {
        if e.is_dir() {
            collect_files(&e, out)?;
        } else if e.extension().is_some_and(|x| x == "txt") {
            out.push(e);
        }
    }
    Ok(())
}
