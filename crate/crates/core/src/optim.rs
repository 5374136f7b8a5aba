//! Types shared by the local optimizers.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::problems::ControlVector;

/// Why an optimization run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    FidelityReached,
    StepConverged,
    BudgetExhausted,
    UserStopped,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::FidelityReached => "fidelity_reached",
            Termination::StepConverged => "step_converged",
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::UserStopped => "user_stopped",
        }
    }

    /// True when the run ended before its wall budget for reasons of its own.
    pub fn is_early(self) -> bool {
        matches!(self, Termination::FidelityReached | Termination::StepConverged)
    }
}

/// Progress after one optimizer iteration (iteration 0 is the seed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub cost: f64,
    pub fidelity: f64,
    /// Accepted line-search step, or the number of changed bins for stochastic ascent.
    pub step_size: f64,
    pub wall_s: f64,
    /// Propagation time steps spent during this iteration.
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub control: ControlVector,
    pub fidelity: f64,
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    pub wall_time: f64,
    pub termination: Termination,
    /// Total propagation time steps, including the seed evaluation.
    pub propagation_steps: u64,
}

/// Shared start/stop flag with an adjustable wall-budget extension.
///
/// Clones observe the same state, so a session or batch runner can stop a
/// running optimizer or grant it extra seconds from another thread.
#[derive(Debug, Clone, Default)]
pub struct StopSignal {
    stopped: Arc<AtomicBool>,
    extension_bits: Arc<AtomicU64>,
}

impl StopSignal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stop(&self) {
        self.stopped.store(true, Ordering::SeqCst);
    }

    pub fn reset(&self) {
        self.stopped.store(false, Ordering::SeqCst);
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped.load(Ordering::SeqCst)
    }

    /// Adds `seconds` to the run's wall budget.
    pub fn extend_budget(&self, seconds: f64) {
        let _ = self.extension_bits.fetch_update(Ordering::SeqCst, Ordering::SeqCst, |bits| {
            Some((f64::from_bits(bits) + seconds).to_bits())
        });
    }

    pub fn budget_extension(&self) -> f64 {
        f64::from_bits(self.extension_bits.load(Ordering::SeqCst))
    }
}

/// Wall clock of one run against its (extensible) budget.
#[derive(Debug, Clone)]
pub(crate) struct Clock {
    start: Instant,
    budget: f64,
}

impl Clock {
    pub(crate) fn start(budget: f64) -> Self {
        Self { start: Instant::now(), budget }
    }

    pub(crate) fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub(crate) fn exhausted(&self, stop: &StopSignal) -> bool {
        self.elapsed() >= self.budget + stop.budget_extension()
    }
}
