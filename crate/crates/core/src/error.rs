use std::path::PathBuf;

use crate::layout::Coord;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no synthesized sequence for angle {angle} at precision {epsilon}")]
    SynthesisLookup { angle: f64, epsilon: u32 },
    #[error("qubit {0} is not placed on the layout")]
    Unplaced(usize),
    #[error("layout error: {0}")]
    Layout(String),
    #[error("cell {0} cannot be part of a route")]
    NotRoutable(Coord),
    #[error("reservation conflict on {0:?}")]
    Conflict(Vec<Coord>),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("scheduler deadlock at t={time}: {detail}")]
    Deadlock { time: String, detail: String },
    #[error("schedule validation failed: {0}")]
    Validation(String),
    #[error("oracle: {0}")]
    Oracle(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
