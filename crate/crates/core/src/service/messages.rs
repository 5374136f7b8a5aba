//! Wire messages of the play service.

use serde::{Deserialize, Serialize};

use crate::analysis::SolutionRecord;
use crate::optim::IterationRecord;
use crate::problems::{Level, ProblemSpec};
use crate::seeding::{CursorTrace, SeedProvenance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cursor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<f64>,
}

impl Cursor {
    pub fn from_values(problem: &ProblemSpec, u: &[f64]) -> Self {
        let get = |name: &str| problem.param_index(name).map(|i| u[i]);
        Self { u1: get("u1"), u2: get("u2") }
    }
}

/// Density and potential at one simulation time (ms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    pub density: Vec<f64>,
    pub potential: Vec<f64>,
    pub cursor: Cursor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub iter: usize,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub step_size: f64,
    pub wall_s: f64,
}

impl From<&IterationRecord> for Progress {
    fn from(r: &IterationRecord) -> Self {
        Self { iter: r.iteration, fidelity: r.fidelity, step_size: r.step_size, wall_s: r.wall_s }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlArrays {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub id: String,
    #[serde(rename = "T")]
    pub duration_ms: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub provenance: SeedProvenance,
    pub control: ControlArrays,
}

impl From<&SolutionRecord> for Solution {
    fn from(r: &SolutionRecord) -> Self {
        Self {
            id: r.id.clone(),
            duration_ms: r.duration_ms,
            fidelity: r.fidelity,
            provenance: r.provenance.clone(),
            control: ControlArrays { u1: r.series("u1").map(<[f64]>::to_vec), u2: r.series("u2").map(<[f64]>::to_vec) },
        }
    }
}

/// Messages pushed to stream subscribers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame(Frame),
    Progress(Progress),
    Trace(CursorTrace),
    Solution(Solution),
    Error { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeAction {
    Start,
    Stop,
}

/// Commands accepted on the stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Trace(CursorTrace),
    Optimize { action: OptimizeAction },
    Select { solution_id: String },
    Replay { solution_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub level: Level,
    #[serde(rename = "T")]
    pub duration_ms: f64,
}
