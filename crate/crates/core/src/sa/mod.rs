//! Derivative-free stochastic ascent over piecewise-constant controls.
//!
//! The free samples `1..n_t-1` of one control parameter are split into bins of
//! (almost) equal width. One bin at a time, in a fresh random order every
//! iteration, the bin value is set to the best of `n_d` evenly spaced
//! candidates with all other bins held fixed.
//!
//! For linear dynamics the fidelity of a candidate only needs the state before
//! the bin and the back-propagated target after it; both are cached per bin
//! and moved lazily, so visiting bin `k'` after bin `k` costs `w·|k − k'|`
//! propagation steps. Candidates are applied through precomputed bin
//! propagators. For nonlinear dynamics only the forward cache exists and every
//! candidate is propagated to the end.

mod binned;
mod propagators;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use binned::BinnedControl;

use crate::error::{Error, Result};
use crate::optim::{Clock, IterationRecord, OptimizationResult, StopSignal, Termination};
use crate::problems::{overlap_fidelity, ControlVector, Level, ProblemSpec, Propagator};
use crate::wave::raw_inner;
use propagators::BinPropagators;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    /// Number of bins; `None` makes every free sample its own bin.
    pub n_b: Option<usize>,
    /// Number of candidate values per bin.
    pub n_d: usize,
    /// Wall-clock budget in seconds.
    pub wall_budget: f64,
    pub f_stop: f64,
    /// Seed of the random visiting order.
    pub order_seed: u64,
    /// Optional cap on iterations, reported as an exhausted budget.
    pub max_iterations: Option<usize>,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self { n_b: None, n_d: 128, wall_budget: 780.0, f_stop: 0.999, order_seed: 0, max_iterations: None }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_d < 2 || self.n_b == Some(0) || !(self.wall_budget > 0.0) || !(self.f_stop > 0.0 && self.f_stop <= 1.0)
        {
            return Err(Error::InvalidArgument(format!("invalid stochastic-ascent configuration {self:?}")));
        }
        Ok(())
    }
}

/// `n_d` values evenly spaced from the lower to the upper bound, both included.
pub fn candidate_set((lo, hi): (f64, f64), n_d: usize) -> Vec<f64> {
    assert!(n_d >= 2, "at least two candidates are required");
    (0..n_d)
        .map(|i| if i + 1 == n_d { hi } else { lo + (hi - lo) * i as f64 / (n_d - 1) as f64 })
        .collect()
}

/// Which parameter stochastic ascent optimizes and the interior values of the others.
///
/// On the two-parameter level the tweezer depth is held maximally deep.
pub fn layout(problem: &ProblemSpec) -> (usize, Vec<(usize, f64)>) {
    match problem.level {
        Level::BringHomeWater => (0, vec![(1, problem.bounds[1].0)]),
        _ => (0, Vec::new()),
    }
}

/// Index of the best value in `fs`: `current` if it attains the maximum, else the first maximizer.
pub fn select(fs: &[f64], current: usize) -> usize {
    let best = fs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if fs[current] == best {
        current
    } else {
        fs.iter().position(|&f| f == best).unwrap_or(current)
    }
}

/// Live state of one stochastic-ascent run: the binned control plus its caches.
pub struct SaState<'a> {
    problem: &'a ProblemSpec,
    control: BinnedControl,
    candidates: Vec<f64>,
    /// Index into `candidates` of every bin's value.
    choice: Vec<usize>,
    prop: Propagator,
    back: Propagator,
    /// State before the first step of each bin.
    fwd: Vec<Vec<Complex64>>,
    /// Back-propagated target after the last step of each bin (linear only).
    bwd: Vec<Vec<Complex64>>,
    fwd_valid: usize,
    bwd_valid: usize,
    bin_props: Option<std::sync::Arc<BinPropagators>>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
    /// Candidate evaluations, counted as one step each in the linear case.
    evaluations: u64,
    fidelity: f64,
}

impl<'a> SaState<'a> {
    /// Bins `seed`, snapping every bin to the candidate nearest its mean value.
    pub fn new(problem: &'a ProblemSpec, seed: &ControlVector, config: &SaConfig) -> Result<Self> {
        config.validate()?;
        problem.check_control(seed)?;
        seed.check_endpoints()?;
        let (param, frozen) = layout(problem);
        let n_free = problem.n_t - 2;
        let n_b = config.n_b.unwrap_or(n_free).min(n_free);
        let candidates = candidate_set(problem.bounds[param], config.n_d);
        let mut control = BinnedControl::from_control(seed, param, n_b, &frozen);
        let choice: Vec<usize> = control
            .values()
            .iter()
            .map(|&v| {
                (0..candidates.len())
                    .min_by(|&a, &b| (candidates[a] - v).abs().total_cmp(&(candidates[b] - v).abs()))
                    .expect("n_d >= 2")
            })
            .collect();
        for (k, &c) in choice.iter().enumerate() {
            control.set(k, candidates[c]);
        }
        let linear = problem.g == 0.0;
        let bin_props = if linear {
            let mut u = vec![0.0; problem.n_params()];
            for &(p, v) in &frozen {
                u[p] = v;
            }
            Some(propagators::shared(problem, param, &u, &candidates, &control.widths()))
        } else {
            None
        };
        let n = problem.grid.len();
        let mut state = Self {
            problem,
            candidates,
            choice,
            prop: Propagator::new(problem),
            back: Propagator::new(problem),
            fwd: vec![vec![Complex64::default(); n]; n_b],
            bwd: if linear { vec![vec![Complex64::default(); n]; n_b] } else { Vec::new() },
            fwd_valid: 0,
            bwd_valid: n_b - 1,
            bin_props,
            scratch: vec![Complex64::default(); n],
            work: vec![Complex64::default(); n],
            evaluations: 0,
            fidelity: 0.0,
            control,
        };
        state.init_caches();
        state.fidelity = state.full_fidelity();
        Ok(state)
    }

    fn init_caches(&mut self) {
        // bin 0 starts after the fixed first step
        let mut s = self.problem.psi0.amplitudes().to_vec();
        let c = self.control.expanded();
        self.prop.advance(self.problem, c, 0, self.control.range(0).0, &mut s);
        self.fwd[0] = s;
        self.fwd_valid = 0;
        if !self.bwd.is_empty() {
            // the last bin ends after the last step
            let last = self.control.n_bins() - 1;
            debug_assert_eq!(self.control.range(last).1, self.problem.n_t - 1);
            self.bwd[last] = self.problem.target_amplitudes().to_vec();
            self.bwd_valid = last;
        }
    }

    pub fn n_bins(&self) -> usize {
        self.control.n_bins()
    }

    pub fn candidates(&self) -> &[f64] {
        &self.candidates
    }

    pub fn control(&self) -> &ControlVector {
        self.control.expanded()
    }

    pub fn binned(&self) -> &BinnedControl {
        &self.control
    }

    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// Propagation steps spent so far, candidate evaluations included.
    pub fn steps(&self) -> u64 {
        self.prop.step_count() + self.back.step_count() + self.evaluations
    }

    fn full_fidelity(&mut self) -> f64 {
        let mut s = self.problem.psi0.amplitudes().to_vec();
        let mut p = Propagator::new(self.problem);
        p.advance(self.problem, self.control.expanded(), 0, self.problem.n_t - 1, &mut s);
        overlap_fidelity(self.problem, &s)
    }

    /// Brings the forward cache (and backward cache when linear) up to bin `k`.
    fn move_caches(&mut self, k: usize) {
        let c = self.control.expanded();
        while self.fwd_valid < k {
            let (a, b) = self.control.range(self.fwd_valid);
            let mut s = std::mem::take(&mut self.fwd[self.fwd_valid + 1]);
            s.copy_from_slice(&self.fwd[self.fwd_valid]);
            self.prop.advance(self.problem, c, a, b, &mut s);
            self.fwd[self.fwd_valid + 1] = s;
            self.fwd_valid += 1;
        }
        if !self.bwd.is_empty() {
            while self.bwd_valid > k {
                let (a, b) = self.control.range(self.bwd_valid);
                let mut s = std::mem::take(&mut self.bwd[self.bwd_valid - 1]);
                s.copy_from_slice(&self.bwd[self.bwd_valid]);
                self.back.retreat_with(self.problem, a, b, &mut s, |j, u| c.at(j, u));
                self.bwd[self.bwd_valid - 1] = s;
                self.bwd_valid -= 1;
            }
        }
    }

    /// Fidelity for every candidate value of bin `k`, all other bins fixed.
    pub fn candidate_fidelities(&mut self, k: usize) -> Vec<f64> {
        self.move_caches(k);
        let problem = self.problem;
        let dx = problem.grid.dx();
        let (a, b) = self.control.range(k);
        let n_d = self.candidates.len();
        let mut out = Vec::with_capacity(n_d);
        if let Some(bp) = self.bin_props.clone() {
            let psi = &self.fwd[k];
            let chi = &self.bwd[k];
            if b - a == 1 {
                // ⟨K†χ| D_c |Kψ⟩ with the kinetic half steps applied once
                self.scratch.copy_from_slice(psi);
                self.work.copy_from_slice(chi);
                let stepper = self.prop.stepper_mut();
                stepper.kinetic_half(&mut self.scratch, false);
                stepper.kinetic_half(&mut self.work, true);
                for c in 0..n_d {
                    let d = bp.diagonal(c);
                    let acc: Complex64 =
                        self.work.iter().zip(d).zip(&self.scratch).map(|((w, d), s)| w.conj() * d * s).sum();
                    out.push((acc * dx).norm_sqr());
                }
                self.evaluations += 2 + n_d as u64;
            } else {
                let m = bp.matrices(b - a).expect("bin propagators exist for every width");
                for c in 0..n_d {
                    bp.apply(m, c, psi, &mut self.scratch);
                    out.push((raw_inner(chi, &self.scratch) * dx).norm_sqr());
                }
                self.evaluations += n_d as u64;
            }
        } else {
            let end = problem.n_t - 1;
            let (param, _) = layout(problem);
            for c in 0..n_d {
                self.scratch.copy_from_slice(&self.fwd[k]);
                let value = self.candidates[c];
                let ctrl = self.control.expanded();
                self.prop.advance_with(problem, a, end, &mut self.scratch, |j, out| {
                    ctrl.at(j, out);
                    if j < b {
                        out[param] = value;
                    }
                });
                out.push(overlap_fidelity(problem, &self.scratch));
            }
        }
        out
    }

    /// Sets bin `k` to its best candidate; returns whether the value changed.
    ///
    /// Ties keep the incumbent when it attains the maximum, otherwise the lowest index wins.
    pub fn update_bin(&mut self, k: usize) -> bool {
        let fs = self.candidate_fidelities(k);
        let current = self.choice[k];
        let pick = select(&fs, current);
        self.fidelity = fs[pick];
        // The update is applied even when the value is unchanged: caches
        // before bin k stay valid forwards and after bin k backwards, so the
        // next visit at k' moves them by w·|k − k'| steps.
        self.fwd_valid = self.fwd_valid.min(k);
        self.bwd_valid = self.bwd_valid.max(k);
        if pick == current {
            return false;
        }
        self.choice[k] = pick;
        self.control.set(k, self.candidates[pick]);
        true
    }

    /// Visits every bin once in the order given by `rng`; returns the number of changed bins.
    pub fn iterate(&mut self, rng: &mut ChaCha8Rng) -> usize {
        let mut order: Vec<usize> = (0..self.n_bins()).collect();
        order.shuffle(rng);
        order.into_iter().filter(|&k| self.update_bin(k)).count()
    }

    #[cfg(test)]
    fn check_caches(&mut self) -> f64 {
        let c = self.control.expanded().clone();
        let mut worst: f64 = 0.0;
        let mut s = self.problem.psi0.amplitudes().to_vec();
        let mut p = Propagator::new(self.problem);
        p.advance(self.problem, &c, 0, self.control.range(0).0, &mut s);
        for k in 0..=self.fwd_valid {
            let (a, b) = self.control.range(k);
            worst = worst.max(s.iter().zip(&self.fwd[k]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
            p.advance(self.problem, &c, a, b, &mut s);
        }
        if !self.bwd.is_empty() {
            let mut t = self.problem.target_amplitudes().to_vec();
            for k in (self.bwd_valid..self.n_bins()).rev() {
                worst = worst.max(t.iter().zip(&self.bwd[k]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
                let (a, b) = self.control.range(k);
                p.retreat_with(self.problem, a, b, &mut t, |j, u| c.at(j, u));
            }
        }
        worst
    }
}

/// Runs stochastic ascent from `seed` until the fidelity target, the budget or a sweep without changes.
pub fn optimize(
    problem: &ProblemSpec,
    seed: &ControlVector,
    config: &SaConfig,
    stop: &StopSignal,
) -> Result<OptimizationResult> {
    optimize_with(problem, seed, config, stop, &mut |_| {})
}

pub fn optimize_with(
    problem: &ProblemSpec,
    seed: &ControlVector,
    config: &SaConfig,
    stop: &StopSignal,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<OptimizationResult> {
    let clock = Clock::start(config.wall_budget);
    let mut state = SaState::new(problem, seed, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.order_seed);
    let mut history = vec![IterationRecord {
        iteration: 0,
        cost: 1.0 - state.fidelity,
        fidelity: state.fidelity,
        step_size: 0.0,
        wall_s: clock.elapsed(),
        steps: state.steps(),
    }];
    observer(&history[0]);
    let mut iteration = 0;
    let termination = 'outer: loop {
        if state.fidelity >= config.f_stop {
            break Termination::FidelityReached;
        }
        if stop.is_stopped() {
            break Termination::UserStopped;
        }
        if clock.exhausted(stop) || config.max_iterations.is_some_and(|m| iteration >= m) {
            break Termination::BudgetExhausted;
        }
        let before = state.steps();
        let mut order: Vec<usize> = (0..state.n_bins()).collect();
        order.shuffle(&mut rng);
        let mut changed = 0;
        for k in order {
            if state.update_bin(k) {
                changed += 1;
            }
            if state.fidelity >= config.f_stop {
                break;
            }
            if stop.is_stopped() {
                break 'outer Termination::UserStopped;
            }
            if clock.exhausted(stop) {
                break 'outer Termination::BudgetExhausted;
            }
        }
        iteration += 1;
        let rec = IterationRecord {
            iteration,
            cost: 1.0 - state.fidelity,
            fidelity: state.fidelity,
            step_size: changed as f64,
            wall_s: clock.elapsed(),
            steps: state.steps() - before,
        };
        observer(&rec);
        history.push(rec);
        if changed == 0 && state.fidelity < config.f_stop {
            break Termination::StepConverged;
        }
    };
    Ok(OptimizationResult {
        control: state.control().clone(),
        fidelity: state.fidelity,
        history,
        iterations: iteration,
        wall_time: clock.elapsed(),
        termination,
        propagation_steps: state.steps(),
    })
}
