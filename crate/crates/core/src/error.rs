use std::path::PathBuf;

use thiserror::Error;

use crate::world::Point2;

/// Failure while reading a map from its text form.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapParseError {
    #[error("line {line}: header must be `width height cell_width`: {reason}")]
    Header { line: usize, reason: String },
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },
    #[error("row {row}, col {col}: unknown map character {ch:?}")]
    InvalidChar { row: usize, col: usize, ch: char },
    #[error("expected {expected} map rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] MapParseError),

    #[error("cell index {0} is outside the map")]
    CellOutOfRange(usize),

    #[error("point ({x:.3}, {y:.3}) is outside the map", x = .0.x, y = .0.y)]
    OutsideMap(Point2),

    #[error("point ({x:.3}, {y:.3}) lies inside an occupied cell", x = .0.x, y = .0.y)]
    InsideObstacle(Point2),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("point list is empty")]
    EmptyPoints,

    #[error("no candidate cells left to explore")]
    ExplorationComplete,

    #[error("distance matrix contains unreachable pairs; the visibility graph is disconnected")]
    Disconnected,

    #[error("waypoint graph still disconnected after {restarts} restarts (last N_wp = {waypoints})")]
    Unsolvable { restarts: usize, waypoints: usize },

    #[error("need {requested} waypoints but the map has only {free} free cells")]
    TooManyWaypoints { requested: usize, free: usize },

    #[error("ground-truth collision at step {step}: robot entered ({x:.3}, {y:.3})", x = .at.x, y = .at.y)]
    Collision { step: usize, at: Point2 },

    #[error("run with seed {seed} failed: {source}")]
    RunFailed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown planner `{0}`")]
    UnknownPlanner(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
