//! Gradient-based control optimization (GRAPE).
//!
//! The cost J = (1 − F) + derivative penalty + boundary penalty is minimized in
//! normalized control coordinates with a limited-memory BFGS direction and a
//! projected backtracking line search. Control samples at both ends are fixed.

mod adjoint;
mod cost;
mod lbfgs;

use serde::{Deserialize, Serialize};

pub use cost::{cost, cost_terms, gradient, CostTerms};

use crate::error::{Error, Result};
use crate::optim::{Clock, IterationRecord, OptimizationResult, StopSignal, Termination};
use crate::problems::{denormalize, ControlVector, ProblemSpec};
use adjoint::Adjoint;
use lbfgs::Lbfgs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrapeConfig {
    /// Weight of the squared-derivative penalty.
    pub gamma: f64,
    /// Weight of the squared-overshoot boundary penalty.
    pub sigma_bound: f64,
    pub f_stop: f64,
    /// Line-search step below which the run counts as converged.
    pub step_stop: f64,
    /// Wall-clock budget in seconds.
    pub wall_budget: f64,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Sufficient-decrease constant of the line search.
    pub c1: f64,
    /// Largest normalized change of any sample in a steepest-descent step.
    pub initial_step: f64,
    /// Optional cap on iterations, reported as an exhausted budget.
    pub max_iterations: Option<usize>,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            gamma: 1e-6,
            sigma_bound: 2e3,
            f_stop: 0.999,
            step_stop: 1e-7,
            wall_budget: 780.0,
            memory: 10,
            c1: 1e-4,
            initial_step: 0.1,
            max_iterations: None,
        }
    }
}

impl GrapeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma >= 0.0
            && self.sigma_bound >= 0.0
            && self.f_stop > 0.0
            && self.f_stop <= 1.0
            && self.step_stop > 0.0
            && self.wall_budget > 0.0
            && self.c1 > 0.0
            && self.c1 < 1.0
            && self.initial_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid GRAPE configuration {self:?}")))
        }
    }
}

/// Flattened normalized control with the fixed end points.
struct Variables {
    n_t: usize,
    bounds: Vec<(f64, f64)>,
    x: Vec<f64>,
}

impl Variables {
    fn from_control(c: &ControlVector) -> Self {
        let x = c.to_normalized().concat();
        Self { n_t: c.len(), bounds: c.bounds().to_vec(), x }
    }

    fn is_interior(&self, k: usize) -> bool {
        let j = k % self.n_t;
        j > 0 && j + 1 < self.n_t
    }

    fn series(&self) -> Vec<Vec<f64>> {
        self.x.chunks(self.n_t).map(<[f64]>::to_vec).collect()
    }

    /// Writes the interior samples into `control`, leaving end points untouched.
    fn write(&self, control: &mut ControlVector) {
        for (p, &b) in self.bounds.iter().enumerate() {
            let s = control.series_mut(p);
            for j in 1..self.n_t - 1 {
                s[j] = denormalize(self.x[p * self.n_t + j], b).clamp(b.0, b.1);
            }
        }
    }
}

struct Objective<'a> {
    adj: Adjoint<'a>,
    control: ControlVector,
    config: &'a GrapeConfig,
    dt: f64,
}

impl Objective<'_> {
    /// Cost and fidelity at `vars`, leaving the forward pass ready for [`Self::gradient`].
    fn evaluate(&mut self, vars: &Variables) -> (f64, f64) {
        vars.write(&mut self.control);
        let f = self.adj.forward(&self.control);
        let (a, b) = cost::penalties(&vars.series(), self.dt, self.config.gamma, self.config.sigma_bound);
        (1.0 - f + a + b, f)
    }

    fn gradient(&mut self, vars: &Variables) -> Vec<f64> {
        let mut g = self.adj.backward(&self.control);
        cost::normalized_gradient(&mut g, &vars.bounds);
        cost::add_penalty_gradient(&vars.series(), self.dt, self.config.gamma, self.config.sigma_bound, &mut g);
        let mut flat = g.concat();
        for (k, v) in flat.iter_mut().enumerate() {
            if !vars.is_interior(k) {
                *v = 0.0;
            }
        }
        flat
    }
}

pub fn optimize(
    problem: &ProblemSpec,
    seed: &ControlVector,
    config: &GrapeConfig,
    stop: &StopSignal,
) -> Result<OptimizationResult> {
    optimize_with(problem, seed, config, stop, &mut |_| {})
}

/// [`optimize`] reporting every iteration, including the seed as iteration 0, to `observer`.
pub fn optimize_with(
    problem: &ProblemSpec,
    seed: &ControlVector,
    config: &GrapeConfig,
    stop: &StopSignal,
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<OptimizationResult> {
    config.validate()?;
    problem.check_control(seed)?;
    seed.check_endpoints()?;
    let clock = Clock::start(config.wall_budget);
    let mut obj = Objective { adj: Adjoint::new(problem), control: seed.clone(), config, dt: problem.dt };
    let mut vars = Variables::from_control(seed);
    let (mut cost, mut fidelity) = obj.evaluate(&vars);
    if !cost.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut history = vec![IterationRecord {
        iteration: 0,
        cost,
        fidelity,
        step_size: 0.0,
        wall_s: clock.elapsed(),
        steps: obj.adj.steps,
    }];
    observer(&history[0]);
    let mut grad = Vec::new();
    let mut lbfgs = Lbfgs::new(config.memory);
    let mut iteration = 0;
    let termination = 'outer: loop {
        if fidelity >= config.f_stop {
            break Termination::FidelityReached;
        }
        if stop.is_stopped() {
            break Termination::UserStopped;
        }
        if clock.exhausted(stop) || config.max_iterations.is_some_and(|m| iteration >= m) {
            break Termination::BudgetExhausted;
        }
        let steps_before = obj.adj.steps;
        if grad.is_empty() {
            grad = obj.gradient(&vars);
        }
        let free: Vec<bool> = (0..vars.x.len())
            .map(|k| {
                vars.is_interior(k) && !(vars.x[k] <= 0.0 && grad[k] > 0.0) && !(vars.x[k] >= 1.0 && grad[k] < 0.0)
            })
            .collect();
        let mut dir = lbfgs.direction(&grad, &free);
        let mut slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        if lbfgs.is_empty() || !(slope < 0.0) {
            lbfgs.reset();
            dir = grad.iter().zip(&free).map(|(g, &f)| if f { -g } else { 0.0 }).collect();
            let scale = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            if scale == 0.0 {
                break Termination::StepConverged;
            }
            dir.iter_mut().for_each(|d| *d *= config.initial_step / scale);
            slope = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        }
        debug_assert!(slope < 0.0);

        let mut alpha = 1.0;
        let trial = loop {
            let mut clamped = false;
            let x_new: Vec<f64> = vars
                .x
                .iter()
                .zip(&dir)
                .map(|(&x, &d)| {
                    if d == 0.0 {
                        return x;
                    }
                    let v = x + alpha * d;
                    if !(0.0..=1.0).contains(&v) {
                        clamped = true;
                    }
                    v.clamp(0.0, 1.0)
                })
                .collect();
            let candidate = Variables { n_t: vars.n_t, bounds: vars.bounds.clone(), x: x_new };
            let (c, f) = obj.evaluate(&candidate);
            let decrease: f64 = candidate.x.iter().zip(&vars.x).zip(&grad).map(|((a, b), g)| (a - b) * g).sum();
            // Once c1·decrease drops below the rounding of `cost` the Armijo test
            // alone would accept steps that make no progress.
            if c.is_finite() && c <= cost + config.c1 * decrease && c < cost {
                break (candidate, c, f, clamped);
            }
            alpha *= 0.5;
            if alpha < config.step_stop {
                break 'outer Termination::StepConverged;
            }
            if stop.is_stopped() {
                break 'outer Termination::UserStopped;
            }
            if clock.exhausted(stop) {
                break 'outer Termination::BudgetExhausted;
            }
        };
        let (new_vars, new_cost, new_fidelity, clamped) = trial;
        let new_grad = obj.gradient(&new_vars);
        if clamped {
            lbfgs.reset();
        } else {
            let s = new_vars.x.iter().zip(&vars.x).map(|(a, b)| a - b).collect();
            let y = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            lbfgs.push(s, y);
        }
        vars = new_vars;
        grad = new_grad;
        cost = new_cost;
        fidelity = new_fidelity;
        iteration += 1;
        let rec = IterationRecord {
            iteration,
            cost,
            fidelity,
            step_size: alpha,
            wall_s: clock.elapsed(),
            steps: obj.adj.steps - steps_before,
        };
        observer(&rec);
        history.push(rec);
    };
    vars.write(&mut obj.control);
    let mut control = obj.control;
    // keep the seed's end points bit-identical
    for p in 0..control.n_params() {
        let s = control.series_mut(p);
        let n = s.len();
        s[0] = seed.series(p)[0];
        s[n - 1] = seed.series(p)[n - 1];
    }
    Ok(OptimizationResult {
        control,
        fidelity,
        history,
        iterations: iteration,
        wall_time: clock.elapsed(),
        termination,
        propagation_steps: obj.adj.steps,
    })
}
