use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{IterationRecord, OptimizationResult, Termination};
use crate::problems::{ControlVector, Level, ProblemSpec};
use crate::seeding::SeedProvenance;

/// One optimized (or merely evaluated) control with everything needed to place
/// it on a fidelity-versus-duration plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub id: String,
    pub level: Level,
    /// Duration in milliseconds.
    #[serde(rename = "T")]
    pub duration_ms: f64,
    /// Time step in simulation units.
    pub dt: f64,
    pub control: ControlVector,
    #[serde(rename = "F")]
    pub fidelity: f64,
    /// Method tag such as `grape`, `sa`, `sa40` or `seed`.
    pub method: String,
    pub provenance: SeedProvenance,
    pub iterations: usize,
    pub wall_s: f64,
    pub termination: Option<Termination>,
    /// ⟨x(t_j)⟩ at every control sample, when recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub telemetry: Vec<IterationRecord>,
    /// Set when the run producing this record failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SolutionRecord {
    /// Record of an unoptimized control.
    pub fn from_seed(
        id: impl Into<String>,
        problem: &ProblemSpec,
        control: ControlVector,
        fidelity: f64,
        provenance: SeedProvenance,
    ) -> Self {
        Self {
            id: id.into(),
            level: problem.level,
            duration_ms: problem.duration_ms(),
            dt: problem.dt,
            control,
            fidelity,
            method: "seed".into(),
            provenance,
            iterations: 0,
            wall_s: 0.0,
            termination: None,
            expectation: None,
            telemetry: Vec::new(),
            error: None,
        }
    }

    pub fn from_result(
        id: impl Into<String>,
        problem: &ProblemSpec,
        method: impl Into<String>,
        provenance: SeedProvenance,
        result: OptimizationResult,
    ) -> Self {
        Self {
            id: id.into(),
            level: problem.level,
            duration_ms: problem.duration_ms(),
            dt: problem.dt,
            control: result.control,
            fidelity: result.fidelity,
            method: method.into(),
            provenance,
            iterations: result.iterations,
            wall_s: result.wall_time,
            termination: Some(result.termination),
            expectation: None,
            telemetry: result.history,
            error: None,
        }
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }

    /// Control series of the named parameter (`u1` or `u2`).
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        let idx = param_names(self.level).iter().position(|n| *n == name)?;
        Some(self.control.series(idx))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fidelity) {
            return Err(Error::InvalidArgument(format!("record {}: F = {} outside [0, 1]", self.id, self.fidelity)));
        }
        if !(self.duration_ms > 0.0) || !self.duration_ms.is_finite() {
            return Err(Error::InvalidArgument(format!("record {}: bad duration {}", self.id, self.duration_ms)));
        }
        if self.control.dt != self.dt {
            return Err(Error::InvalidArgument(format!("record {}: control dt differs from record dt", self.id)));
        }
        if self.control.n_params() != param_names(self.level).len() {
            return Err(Error::InvalidArgument(format!("record {}: wrong parameter count for {}", self.id, self.level)));
        }
        self.control.check_bounds()?;
        self.control.check_endpoints()?;
        if let Some(x) = &self.expectation {
            if x.len() != self.control.len() {
                return Err(Error::LengthMismatch { expected: self.control.len(), got: x.len() });
            }
        }
        Ok(())
    }
}

pub(crate) fn param_names(level: Level) -> &'static [&'static str] {
    match level {
        Level::BringHomeWater => &["u1", "u2"],
        Level::Splitting => &["u2"],
        Level::ShakeUp => &["u1"],
    }
}
