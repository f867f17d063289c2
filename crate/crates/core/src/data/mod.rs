//! Trajectory tables in the `frame ped_id x y` text format, fixed-length
//! scene windows over them, and seeded synthetic crowds.

mod synth;
mod table;
mod window;

pub use synth::{generate, generate_all, parse_synth_list, Scenario, SynthSpec};
pub use table::{load_table, save_table, Record, TrajectoryTable};
pub use window::{load_scenes, observation_windows, trajectory_files, window_scenes, WindowMode, DEFAULT_STRIDE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate record for frame {frame}, pedestrian {ped}")]
    Duplicate { line: usize, frame: i64, ped: i64 },
    #[error("non-uniform frame spacing: {prev} -> {next} after a step of {step}")]
    Spacing { prev: i64, next: i64, step: i64 },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<DataError>,
    },
    #[error("invalid synthetic spec: {0}")]
    Synth(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Scene(#[from] crate::stgraph::StGraphError),
}
