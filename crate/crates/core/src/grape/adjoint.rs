//! Forward propagation with stored half-kicked states and the exact discrete adjoint.
//!
//! Each step maps ψ_j to ψ_{j+1} = K N_j K ψ_j with K the kinetic half step and
//! N_j = exp(-iθ), θ = dt (V(u_j) + g|φ|²), φ = K ψ_j. Writing dF = 2 Re⟨λ|dψ⟩
//! with λ_N = ⟨ψ_tgt|ψ_N⟩ ψ_tgt, the costate of each step obeys
//!
//!   μ = K† λ_{j+1},  ∂F/∂u_j = 2 dx dt Σ ∂V/∂u · Im(conj(μ) e^{-iθ} φ),
//!   λ_j = K† [e^{iθ} μ + 2 g dt Im(conj(μ) e^{-iθ} φ) φ],
//!
//! which is the discrete form of the linearized backward equation. The gradient
//! is therefore exact to rounding, for linear and nonlinear dynamics alike.

use num_complex::Complex64;

use crate::problems::{ControlVector, ProblemSpec};
use crate::wave::{raw_inner, SplitStepper};

pub(crate) struct Adjoint<'a> {
    problem: &'a ProblemSpec,
    stepper: SplitStepper,
    pot: Vec<f64>,
    dpot: Vec<f64>,
    u: Vec<f64>,
    /// φ_j = K ψ_j for every step, flattened.
    phis: Vec<Complex64>,
    psi: Vec<Complex64>,
    costate: Vec<Complex64>,
    im: Vec<f64>,
    pub(crate) steps: u64,
}

impl<'a> Adjoint<'a> {
    pub(crate) fn new(problem: &'a ProblemSpec) -> Self {
        let n = problem.grid.len();
        Self {
            problem,
            stepper: problem.real_stepper(),
            pot: vec![0.0; n],
            dpot: vec![0.0; n],
            u: vec![0.0; problem.n_params()],
            phis: vec![Complex64::default(); n * (problem.n_t - 1)],
            psi: vec![Complex64::default(); n],
            costate: vec![Complex64::default(); n],
            im: vec![0.0; n],
            steps: 0,
        }
    }

    /// Propagates ψ₀ through `control`, keeping what the backward pass needs, and returns F.
    pub(crate) fn forward(&mut self, control: &ControlVector) -> f64 {
        let p = self.problem;
        let n = p.grid.len();
        let n_steps = p.n_t - 1;
        self.psi.copy_from_slice(p.psi0.amplitudes());
        self.stepper.kinetic_half(&mut self.psi, false);
        for j in 0..n_steps {
            self.phis[j * n..(j + 1) * n].copy_from_slice(&self.psi);
            control.at(j, &mut self.u);
            p.potential_into(&self.u, &mut self.pot);
            self.stepper.potential(&mut self.psi, &self.pot, p.g);
            if j + 1 < n_steps {
                self.stepper.kinetic_full(&mut self.psi, false);
            }
        }
        self.stepper.kinetic_half(&mut self.psi, false);
        self.steps += n_steps as u64;
        self.fidelity()
    }

    pub(crate) fn fidelity(&self) -> f64 {
        (raw_inner(self.problem.target_amplitudes(), &self.psi) * self.problem.grid.dx()).norm_sqr()
    }

    /// ∂F/∂u_p(t_j) in physical control units for the control last passed to [`forward`](Self::forward).
    ///
    /// The last sample never enters the dynamics, so its entries are zero.
    pub(crate) fn backward(&mut self, control: &ControlVector) -> Vec<Vec<f64>> {
        let p = self.problem;
        let n = p.grid.len();
        let n_steps = p.n_t - 1;
        let dx = p.grid.dx();
        let dt = p.dt;
        let g = p.g;
        let tgt = p.target_amplitudes();
        let overlap = raw_inner(tgt, &self.psi) * dx;
        for (c, t) in self.costate.iter_mut().zip(tgt) {
            *c = overlap * t;
        }
        let mut grad = vec![vec![0.0; p.n_t]; p.n_params()];
        self.stepper.kinetic_half(&mut self.costate, true);
        for j in (0..n_steps).rev() {
            let phi = &self.phis[j * n..(j + 1) * n];
            control.at(j, &mut self.u);
            p.potential_into(&self.u, &mut self.pot);
            for i in 0..n {
                let theta = dt * (self.pot[i] + g * phi[i].norm_sqr());
                let rot = Complex64::from_polar(1.0, -theta);
                let chi = rot * phi[i];
                self.im[i] = (self.costate[i].conj() * chi).im;
                self.costate[i] *= rot.conj();
                if g != 0.0 {
                    self.costate[i] += phi[i] * (2.0 * g * dt * self.im[i]);
                }
            }
            for (k, series) in grad.iter_mut().enumerate() {
                p.potential_derivative_into(&self.u, k, &mut self.dpot);
                let acc: f64 = self.dpot.iter().zip(&self.im).map(|(d, m)| d * m).sum();
                series[j] = 2.0 * dx * dt * acc;
            }
            if j > 0 {
                self.stepper.kinetic_full(&mut self.costate, true);
            }
        }
        self.steps += n_steps as u64;
        grad
    }
}
