//! Strang-split Fourier propagation of `i ψ̇ = -κ ψ'' + V ψ + g|ψ|²ψ`.
//!
//! One step is `K(dt/2) · N(dt) · K(dt/2)` where `K` is diagonal in momentum
//! space and `N` multiplies by `exp(-i dt (V + g|ψ|²))` in position space.
//! Because `|ψ|²` is unchanged by a pointwise phase, `N` is exact and the
//! scheme is unitary up to rounding for real dt.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::function::Wavefunction;
use super::grid::SpatialGrid;
use super::hamiltonian::HamiltonianSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    Real,
    Imaginary,
}

/// Reusable FFT plans and kinetic phase tables for one (grid, κ, dt).
pub struct SplitStepper {
    grid: SpatialGrid,
    dt: f64,
    clock: Clock,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SplitStepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitStepper")
            .field("grid", &self.grid)
            .field("dt", &self.dt)
            .field("clock", &self.clock)
            .finish()
    }
}

impl Clone for SplitStepper {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid,
            dt: self.dt,
            clock: self.clock,
            fft: Arc::clone(&self.fft),
            ifft: Arc::clone(&self.ifft),
            half: self.half.clone(),
            full: self.full.clone(),
            scratch: self.scratch.clone(),
        }
    }
}

impl SplitStepper {
    pub fn real(grid: SpatialGrid, kappa: f64, dt: f64) -> Self {
        Self::build(grid, kappa, dt, Clock::Real)
    }

    /// Imaginary-time stepper with step `tau`; norms decay and must be restored by the caller.
    pub fn imaginary(grid: SpatialGrid, kappa: f64, tau: f64) -> Self {
        Self::build(grid, kappa, tau, Clock::Imaginary)
    }

    fn build(grid: SpatialGrid, kappa: f64, dt: f64, clock: Clock) -> Self {
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
        let inv_n = 1.0 / n as f64;
        let phase = |k: f64, h: f64| match clock {
            Clock::Real => Complex64::from_polar(inv_n, -kappa * k * k * h),
            Clock::Imaginary => Complex64::new(inv_n * (-kappa * k * k * h).exp(), 0.0),
        };
        let momenta = grid.momenta();
        let half = momenta.iter().map(|&k| phase(k, 0.5 * dt)).collect();
        let full = momenta.iter().map(|&k| phase(k, dt)).collect();
        Self {
            grid,
            dt,
            clock,
            fft,
            ifft,
            half,
            full,
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Applies `K(dt/2)`; with `adjoint` applies its Hermitian adjoint instead.
    pub fn kinetic_half(&mut self, buf: &mut [Complex64], adjoint: bool) {
        self.kinetic(buf, false, adjoint)
    }

    /// Applies `K(dt) = K(dt/2)²`.
    pub fn kinetic_full(&mut self, buf: &mut [Complex64], adjoint: bool) {
        self.kinetic(buf, true, adjoint)
    }

    fn kinetic(&mut self, buf: &mut [Complex64], full: bool, adjoint: bool) {
        self.fft.process_with_scratch(buf, &mut self.scratch);
        let table = if full { &self.full } else { &self.half };
        if adjoint {
            buf.iter_mut().zip(table).for_each(|(a, p)| *a *= p.conj());
        } else {
            buf.iter_mut().zip(table).for_each(|(a, p)| *a *= p);
        }
        self.ifft.process_with_scratch(buf, &mut self.scratch);
    }

    /// Applies the pointwise potential + mean-field factor for one full step.
    pub fn potential(&self, buf: &mut [Complex64], v: &[f64], g: f64) {
        apply_potential(buf, v, g, self.dt, self.clock);
    }

    /// One symmetric step `K(dt/2) N(dt) K(dt/2)`.
    pub fn step(&mut self, buf: &mut [Complex64], v: &[f64], g: f64) {
        self.kinetic_half(buf, false);
        self.potential(buf, v, g);
        self.kinetic_half(buf, false);
    }

    pub fn fft_forward(&mut self, buf: &mut [Complex64]) {
        self.fft.process_with_scratch(buf, &mut self.scratch);
    }
}

pub(crate) fn apply_potential(buf: &mut [Complex64], v: &[f64], g: f64, dt: f64, clock: Clock) {
    match clock {
        Clock::Real => {
            if g == 0.0 {
                for (a, &vi) in buf.iter_mut().zip(v) {
                    let (s, c) = (-dt * vi).sin_cos();
                    *a *= Complex64::new(c, s);
                }
            } else {
                for (a, &vi) in buf.iter_mut().zip(v) {
                    let (s, c) = (-dt * (vi + g * a.norm_sqr())).sin_cos();
                    *a *= Complex64::new(c, s);
                }
            }
        }
        Clock::Imaginary => {
            for (a, &vi) in buf.iter_mut().zip(v) {
                *a *= (-dt * (vi + g * a.norm_sqr())).exp();
            }
        }
    }
}

/// One real-time Strang step of `psi` under `ham`.
pub fn step_split_fourier(psi: &Wavefunction, ham: &HamiltonianSpec, dt: f64) -> Result<Wavefunction> {
    ham.grid.ensure_same(psi.grid())?;
    let mut stepper = SplitStepper::real(ham.grid, ham.kappa, dt);
    let mut buf = psi.amplitudes().to_vec();
    stepper.step(&mut buf, &ham.potential, ham.g);
    if buf.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Wavefunction::from_amplitudes(ham.grid, buf)
}

/// Applies `n_steps` real-time steps under a static Hamiltonian, merging adjacent half kicks.
pub fn evolve_static(psi: &Wavefunction, ham: &HamiltonianSpec, dt: f64, n_steps: usize) -> Result<Wavefunction> {
    ham.grid.ensure_same(psi.grid())?;
    let mut stepper = SplitStepper::real(ham.grid, ham.kappa, dt);
    let mut buf = psi.amplitudes().to_vec();
    if n_steps > 0 {
        stepper.kinetic_half(&mut buf, false);
        for s in 0..n_steps {
            stepper.potential(&mut buf, &ham.potential, ham.g);
            if s + 1 < n_steps {
                stepper.kinetic_full(&mut buf, false);
            }
        }
        stepper.kinetic_half(&mut buf, false);
    }
    if buf.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Wavefunction::from_amplitudes(ham.grid, buf)
}

/// ⟨ψ| -κ ∂² |ψ⟩ evaluated spectrally.
pub fn kinetic_expectation(psi: &Wavefunction, kappa: f64) -> f64 {
    let grid = *psi.grid();
    let n = grid.len();
    let mut buf = psi.amplitudes().to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let k = grid.momenta();
    let s: f64 = buf.iter().zip(&k).map(|(a, ki)| kappa * ki * ki * a.norm_sqr()).sum();
    s * grid.dx() / n as f64
}
