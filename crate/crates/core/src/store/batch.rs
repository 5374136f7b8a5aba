//! Batch optimization of many seeds under a shared wall-time ledger.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::archive::{Archive, Manifest};
use super::ledger::BudgetLedger;
use crate::analysis::SolutionRecord;
use crate::error::{Error, Result};
use crate::grape::{self, GrapeConfig};
use crate::optim::{IterationRecord, OptimizationResult, StopSignal};
use crate::problems::{evaluate_fidelity, propagate, ControlVector, ProblemSpec};
use crate::sa::{self, SaConfig};
use crate::seeding::SeedProvenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grape,
    Sa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchConfig {
    pub method: Method,
    pub grape: GrapeConfig,
    pub sa: SaConfig,
    /// Wall seconds initially granted to every seed; overrides the optimizer budgets.
    pub min_budget: f64,
    pub workers: usize,
    /// Store ⟨x(t)⟩ of every optimized control.
    pub record_expectation: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            method: Method::Grape,
            grape: GrapeConfig::default(),
            sa: SaConfig::default(),
            min_budget: 780.0,
            workers: 1,
            record_expectation: false,
        }
    }
}

impl BatchConfig {
    /// `grape`, `sa` (one bin per sample) or `sa<n_b>`.
    pub fn method_tag(&self) -> String {
        match (self.method, self.sa.n_b) {
            (Method::Grape, _) => "grape".into(),
            (Method::Sa, None) => "sa".into(),
            (Method::Sa, Some(n)) => format!("sa{n}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchSeed {
    pub control: ControlVector,
    pub provenance: SeedProvenance,
    /// RNG seed that produced the control, echoed into the manifest.
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub archive: Archive,
    pub ledger: BudgetLedger,
}

fn run_one(
    problem: &ProblemSpec,
    seed: &ControlVector,
    config: &BatchConfig,
    index: usize,
    budget: f64,
    stop: &StopSignal,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<OptimizationResult> {
    match config.method {
        Method::Grape => {
            let c = GrapeConfig { wall_budget: budget, ..config.grape.clone() };
            grape::optimize_with(problem, seed, &c, stop, observer)
        }
        Method::Sa => {
            let c = SaConfig { wall_budget: budget, order_seed: config.sa.order_seed.wrapping_add(index as u64), ..config.sa.clone() };
            sa::optimize_with(problem, seed, &c, stop, observer)
        }
    }
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| e.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "optimizer panicked".into())
}

/// Optimizes every seed and collects the results in seed order.
///
/// `stop` aborts the whole batch: running optimizations end with
/// `user_stopped` and seeds not yet started are left out of the archive.
/// `progress` receives each run's per-iteration telemetry.
pub fn run_batch(
    problem: &ProblemSpec,
    seeds: &[BatchSeed],
    config: &BatchConfig,
    stop: &StopSignal,
    progress: &(dyn Fn(usize, &IterationRecord) + Sync),
) -> Result<BatchOutcome> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds to optimize".into()));
    }
    if !(config.min_budget > 0.0) {
        return Err(Error::InvalidArgument(format!("minimum budget {} must be positive", config.min_budget)));
    }
    match config.method {
        Method::Grape => config.grape.validate()?,
        Method::Sa => config.sa.validate()?,
    }
    for s in seeds {
        problem.check_control(&s.control)?;
    }

    let tag = config.method_tag();
    let n = seeds.len();
    let ledger = Mutex::new(BudgetLedger::new(n, config.min_budget));
    let signals: Mutex<Vec<Option<StopSignal>>> = Mutex::new(vec![None; n]);
    let results: Mutex<Vec<Option<SolutionRecord>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);

    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= n || stop.is_stopped() {
            break;
        }
        let budget = ledger.lock().unwrap().start(i).expect("each run starts once");
        let signal = StopSignal::new();
        signals.lock().unwrap()[i] = Some(signal.clone());
        let seed = &seeds[i];
        let started = Instant::now();
        let mut observer = |rec: &IterationRecord| {
            progress(i, rec);
            if stop.is_stopped() {
                signal.stop();
            }
        };
        let outcome = catch_unwind(AssertUnwindSafe(|| {
            run_one(problem, &seed.control, config, i, budget, &signal, &mut observer)
        }))
        .unwrap_or_else(|e| Err(Error::InvalidArgument(panic_message(e))));
        let used = started.elapsed().as_secs_f64();
        signals.lock().unwrap()[i] = None;

        let id = format!("{}-{tag}-{i:05}", problem.level);
        let record = match outcome {
            Ok(result) => {
                let mut r = SolutionRecord::from_result(id, problem, &tag, seed.provenance.clone(), result);
                if config.record_expectation {
                    match propagate(problem, &r.control, true) {
                        Ok(p) => r.expectation = p.mean_position,
                        Err(e) => warn!("run {i}: could not record expectation: {e}"),
                    }
                }
                r
            }
            Err(e) => {
                warn!("run {i} failed: {e}");
                let f = evaluate_fidelity(problem, &seed.control).unwrap_or(0.0);
                let mut r = SolutionRecord::from_seed(id, problem, seed.control.clone(), f, seed.provenance.clone());
                r.method = tag.clone();
                r.wall_s = used;
                r.error = Some(e.to_string());
                r
            }
        };
        info!("run {i}: F = {:.6} after {:.1} s ({:?})", record.fidelity, used, record.termination);
        results.lock().unwrap()[i] = Some(record);

        let transfers = ledger.lock().unwrap().finish(i, used).expect("run was started");
        let signals = signals.lock().unwrap();
        for (j, extra) in transfers {
            if let Some(s) = &signals[j] {
                s.extend_budget(extra);
            }
        }
    };

    let workers = config.workers.clamp(1, n);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(worker);
        }
    });

    let mut manifest = Manifest::new(problem.level, tag);
    manifest.rng_seeds = seeds.iter().filter_map(|s| s.rng_seed).collect();
    manifest.config = serde_json::to_value(config)?;
    manifest.settings.insert("T".into(), problem.duration_ms().to_string());
    manifest.settings.insert("workers".into(), workers.to_string());
    let mut archive = Archive::new(manifest);
    for r in results.into_inner().unwrap().into_iter().flatten() {
        archive.push(r);
    }
    Ok(BatchOutcome { archive, ledger: ledger.into_inner().unwrap() })
}
