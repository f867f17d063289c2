use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::{EvalError, MetricsRow, Trajectories};
use crate::model::fmt_f64;
use crate::stgraph::Point;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            _ => Err(format!("unknown format {s:?} (csv|json|svg)")),
        }
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from("split,variant,ade_norm,fde_norm,ade_world,fde_world,n_scenes,n_peds,seed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.split,
            r.variant,
            fmt_f64(r.ade_norm),
            fmt_f64(r.fde_norm),
            fmt_f64(r.ade_world),
            fmt_f64(r.fde_world),
            r.n_scenes,
            r.n_peds,
            r.seed
        );
    }
    out
}

/// One line per position: `scene,ped_id,step,role,x,y` with roles
/// `observed`, `truth` and `predicted`.
pub fn trajectories_csv(scenes: &[Trajectories]) -> String {
    let mut out = String::from("scene,ped_id,step,role,x,y\n");
    for s in scenes {
        let obs = s.observed.first().map_or(0, Vec::len);
        for (k, id) in s.ped_ids.iter().enumerate() {
            let mut row = |step: usize, role: &str, p: Point| {
                let _ = writeln!(out, "{},{id},{step},{role},{},{}", s.scene, fmt_f64(p[0]), fmt_f64(p[1]));
            };
            for (t, p) in s.observed[k].iter().enumerate() {
                row(t, "observed", *p);
            }
            for (t, p) in s.truth[k].iter().enumerate() {
                if let Some(p) = p {
                    row(obs + t, "truth", *p);
                }
            }
            for (t, p) in s.predicted[k].iter().enumerate() {
                row(obs + t, "predicted", *p);
            }
        }
    }
    out
}

#[derive(Serialize)]
struct Results<'a> {
    metrics: &'a [MetricsRow],
    scenes: &'a [Trajectories],
}

pub fn results_json(rows: &[MetricsRow], scenes: &[Trajectories]) -> String {
    serde_json::to_string_pretty(&Results { metrics: rows, scenes }).expect("plain data serializes")
}

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

/// One scene drawn to scale: observed solid, ground truth dashed, predicted
/// with point markers. Each pedestrian gets one group per role.
pub fn svg_scene(s: &Trajectories) -> String {
    let all: Vec<Point> = s
        .observed
        .iter()
        .flatten()
        .chain(s.predicted.iter().flatten())
        .copied()
        .chain(s.truth.iter().flatten().flatten().copied())
        .collect();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &all {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    if all.is_empty() {
        (lo, hi) = ([0.0; 2], [1.0; 2]);
    }
    let pad = 0.05 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3);
    let (x0, y0) = (lo[0] - pad, lo[1] - pad);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let stroke = 0.004 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {} {w} {h}" width="800" height="{}">"#,
        -(y0 + h),
        (800.0 * h / w).round()
    );
    let _ = writeln!(out, "<title>scene {}</title>", s.scene);
    // Flip y so world coordinates read upwards.
    let _ = writeln!(out, r#"<g transform="scale(1,-1)" fill="none" stroke-width="{stroke}">"#);
    let points = |track: &mut dyn Iterator<Item = Point>| {
        track.map(|p| format!("{},{}", p[0], p[1])).collect::<Vec<_>>().join(" ")
    };
    for (k, id) in s.ped_ids.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let last = *s.observed[k].last().expect("observed track");
        let _ = writeln!(
            out,
            r#"<g class="observed" data-ped="{id}" stroke="{color}"><polyline points="{}"/></g>"#,
            points(&mut s.observed[k].iter().copied())
        );
        let truth: Vec<Point> = s.truth[k].iter().map_while(|p| *p).collect();
        let _ = writeln!(
            out,
            r#"<g class="truth" data-ped="{id}" stroke="{color}" stroke-dasharray="{} {}"><polyline points="{}"/></g>"#,
            4.0 * stroke,
            3.0 * stroke,
            points(&mut std::iter::once(last).chain(truth))
        );
        let _ = write!(
            out,
            r#"<g class="predicted" data-ped="{id}" stroke="{color}" stroke-opacity="0.6"><polyline points="{}"/>"#,
            points(&mut std::iter::once(last).chain(s.predicted[k].iter().copied()))
        );
        for p in &s.predicted[k] {
            let _ = write!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="{color}"/>"#, p[0], p[1], 2.0 * stroke);
        }
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, EvalError> {
    std::fs::write(&path, text).map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(path)
}

/// Write `metrics.csv` + `trajectories.csv`, `results.json`, or one
/// `scene_NNNN.svg` per scene into `dir`. Returns the files written.
pub fn write_results(
    dir: &Path,
    format: ExportFormat,
    rows: &[MetricsRow],
    scenes: &[Trajectories],
) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(dir).map_err(|e| EvalError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    match format {
        ExportFormat::Csv => Ok(vec![
            write(dir.join("metrics.csv"), &metrics_csv(rows))?,
            write(dir.join("trajectories.csv"), &trajectories_csv(scenes))?,
        ]),
        ExportFormat::Json => Ok(vec![write(dir.join("results.json"), &results_json(rows, scenes))?]),
        ExportFormat::Svg => scenes
            .iter()
            .map(|s| write(dir.join(format!("scene_{:04}.svg", s.scene)), &svg_scene(s)))
            .collect(),
    }
}
