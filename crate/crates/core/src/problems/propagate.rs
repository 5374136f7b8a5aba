use num_complex::Complex64;

use super::control::ControlVector;
use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::wave::{raw_inner, SplitStepper, Wavefunction};

/// Result of driving ψ₀ through a control.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub psi: Wavefunction,
    /// ⟨x⟩ after each of the n_t − 1 steps, preceded by the initial value.
    pub mean_position: Option<Vec<f64>>,
}

/// Step-by-step propagation under a control, rebuilding the potential every step.
///
/// Step `j` (0 ≤ j < n_t − 1) uses the control sample at `t_j`.
#[derive(Debug, Clone)]
pub struct Propagator {
    stepper: SplitStepper,
    pot: Vec<f64>,
    u: Vec<f64>,
    g: f64,
    steps: u64,
}

impl Propagator {
    pub fn new(problem: &ProblemSpec) -> Self {
        Self::with_dt(problem, problem.dt)
    }

    /// Propagator with a custom (possibly negative) time step.
    pub fn with_dt(problem: &ProblemSpec, dt: f64) -> Self {
        Self {
            stepper: SplitStepper::real(problem.grid, problem.kappa(), dt),
            pot: vec![0.0; problem.grid.len()],
            u: vec![0.0; problem.n_params()],
            g: problem.g,
            steps: 0,
        }
    }

    /// Total number of time steps applied so far.
    pub fn step_count(&self) -> u64 {
        self.steps
    }

    pub fn reset_step_count(&mut self) {
        self.steps = 0;
    }

    pub fn stepper_mut(&mut self) -> &mut SplitStepper {
        &mut self.stepper
    }

    /// Applies steps `from..to` of `control` to `state`, merging adjacent kinetic half steps.
    pub fn advance(
        &mut self,
        problem: &ProblemSpec,
        control: &ControlVector,
        from: usize,
        to: usize,
        state: &mut [Complex64],
    ) {
        self.advance_with(problem, from, to, state, |j, u| control.at(j, u));
    }

    /// Like [`advance`](Self::advance) with control values supplied by `control_at(j, out)`.
    pub fn advance_with(
        &mut self,
        problem: &ProblemSpec,
        from: usize,
        to: usize,
        state: &mut [Complex64],
        mut control_at: impl FnMut(usize, &mut [f64]),
    ) {
        if to <= from {
            return;
        }
        self.stepper.kinetic_half(state, false);
        for j in from..to {
            control_at(j, &mut self.u);
            problem.potential_into(&self.u, &mut self.pot);
            self.stepper.potential(state, &self.pot, self.g);
            if j + 1 < to {
                self.stepper.kinetic_full(state, false);
            }
        }
        self.stepper.kinetic_half(state, false);
        self.steps += (to - from) as u64;
    }

    /// Advances with a constant control value and precomputed potential.
    pub fn advance_static(&mut self, potential: &[f64], n_steps: usize, state: &mut [Complex64]) {
        if n_steps == 0 {
            return;
        }
        self.stepper.kinetic_half(state, false);
        for s in 0..n_steps {
            self.stepper.potential(state, potential, self.g);
            if s + 1 < n_steps {
                self.stepper.kinetic_full(state, false);
            }
        }
        self.stepper.kinetic_half(state, false);
        self.steps += n_steps as u64;
    }

    /// Applies one step with control values `u`.
    pub fn step(&mut self, problem: &ProblemSpec, u: &[f64], state: &mut [Complex64]) {
        problem.potential_into(u, &mut self.pot);
        self.stepper.step(state, &self.pot, self.g);
        self.steps += 1;
    }

    /// Applies the adjoint of one linear (g = 0) step with control values `u`.
    pub fn step_adjoint(&mut self, problem: &ProblemSpec, u: &[f64], state: &mut [Complex64]) {
        debug_assert!(self.g == 0.0, "adjoint step is only defined for linear dynamics");
        problem.potential_into(u, &mut self.pot);
        self.stepper.kinetic_half(state, true);
        for (a, &v) in state.iter_mut().zip(&self.pot) {
            let (s, c) = (self.stepper.dt() * v).sin_cos();
            *a *= Complex64::new(c, s);
        }
        self.stepper.kinetic_half(state, true);
        self.steps += 1;
    }

    /// Applies the adjoints of linear steps `to-1, .., from` (reverse order) to `state`.
    pub fn retreat_with(
        &mut self,
        problem: &ProblemSpec,
        from: usize,
        to: usize,
        state: &mut [Complex64],
        mut control_at: impl FnMut(usize, &mut [f64]),
    ) {
        debug_assert!(self.g == 0.0, "backward propagation is only defined for linear dynamics");
        if to <= from {
            return;
        }
        let dt = self.stepper.dt();
        self.stepper.kinetic_half(state, true);
        for j in (from..to).rev() {
            control_at(j, &mut self.u);
            problem.potential_into(&self.u, &mut self.pot);
            for (a, &v) in state.iter_mut().zip(&self.pot) {
                let (s, c) = (dt * v).sin_cos();
                *a *= Complex64::new(c, s);
            }
            if j > from {
                self.stepper.kinetic_full(state, true);
            }
        }
        self.stepper.kinetic_half(state, true);
        self.steps += (to - from) as u64;
    }
}

/// Propagates ψ₀ through `control`, optionally recording ⟨x(t_j)⟩ at every step.
pub fn propagate(problem: &ProblemSpec, control: &ControlVector, record_expectation: bool) -> Result<Propagation> {
    problem.check_control(control)?;
    let mut prop = Propagator::new(problem);
    let mut state = problem.psi0.amplitudes().to_vec();
    let steps = problem.n_t - 1;
    let mean_position = if record_expectation {
        let grid = problem.grid;
        let dx = grid.dx();
        let xs = grid.points();
        let mean = |s: &[Complex64]| s.iter().zip(&xs).map(|(a, x)| x * a.norm_sqr()).sum::<f64>() * dx;
        let mut out = Vec::with_capacity(problem.n_t);
        out.push(mean(&state));
        let mut u = vec![0.0; problem.n_params()];
        for j in 0..steps {
            control.at(j, &mut u);
            prop.step(problem, &u, &mut state);
            out.push(mean(&state));
        }
        Some(out)
    } else {
        prop.advance(problem, control, 0, steps, &mut state);
        None
    };
    if state.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(Propagation { psi: Wavefunction::from_amplitudes(problem.grid, state)?, mean_position })
}

/// Transfer fidelity |⟨ψ_tgt|ψ(T)⟩|² of a fully valid control.
pub fn evaluate_fidelity(problem: &ProblemSpec, control: &ControlVector) -> Result<f64> {
    problem.check_control(control)?;
    control.check_endpoints()?;
    let out = propagate(problem, control, false)?;
    Ok(overlap_fidelity(problem, out.psi.amplitudes()))
}

pub(crate) fn overlap_fidelity(problem: &ProblemSpec, state: &[Complex64]) -> f64 {
    (raw_inner(problem.target_amplitudes(), state) * problem.grid.dx()).norm_sqr()
}
