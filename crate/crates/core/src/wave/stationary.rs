//! Stationary states by imaginary-time propagation with renormalization.
//!
//! For `g != 0` the nonlinear term uses the current iterate, so the fixed point
//! is the self-consistent mean-field state. The first excited state is found
//! the same way inside the odd-parity subspace.

use num_complex::Complex64;

use super::function::Wavefunction;
use super::hamiltonian::HamiltonianSpec;
use super::split_step::SplitStepper;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions {
    /// Imaginary-time step.
    pub tau: f64,
    /// Energy change per step below which the iteration may stop.
    pub tolerance: f64,
    /// L2 change of the state per step below which the iteration may stop.
    pub state_tolerance: f64,
    pub max_steps: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self { tau: 1e-3, tolerance: 1e-12, state_tolerance: 1e-12, max_steps: 200_000 }
    }
}

impl StationaryOptions {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Any,
    Even,
    Odd,
}

const CHECK_EVERY: usize = 10;
const SYMMETRY_TOL: f64 = 1e-12;

/// Lowest stationary state of `ham`.
pub fn ground_state(ham: &HamiltonianSpec, opts: &StationaryOptions) -> Result<Wavefunction> {
    let parity = if ham.is_symmetric(SYMMETRY_TOL) { Parity::Even } else { Parity::Any };
    relax(ham, opts, parity)
}

/// First excited state; only defined for potentials symmetric about the grid center.
pub fn excited_state(ham: &HamiltonianSpec, k: usize, opts: &StationaryOptions) -> Result<Wavefunction> {
    if k != 1 {
        return Err(Error::Unsupported(format!("excited state k = {k}; only k = 1 is implemented")));
    }
    if !ham.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::Unsupported("excited state requires a mirror-symmetric potential".into()));
    }
    relax(ham, opts, Parity::Odd)
}

fn relax(ham: &HamiltonianSpec, opts: &StationaryOptions, parity: Parity) -> Result<Wavefunction> {
    let grid = ham.grid;
    let dx = grid.dx();
    let x_center = match parity {
        Parity::Any => {
            let (imin, _) = ham
                .potential
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty grid");
            grid.x(imin)
        }
        _ => grid.center(),
    };
    let width = (grid.x_max() - grid.x_min()) / 20.0;
    let mut buf: Vec<Complex64> = grid
        .points()
        .into_iter()
        .map(|x| {
            let y = x - x_center;
            let env = (-y * y / (2.0 * width * width)).exp();
            let shape = if parity == Parity::Odd { y / width } else { 1.0 };
            Complex64::new(env * shape, 0.0)
        })
        .collect();
    project(&mut buf, parity);
    renormalize(&mut buf, dx)?;

    let mut stepper = SplitStepper::imaginary(grid, ham.kappa, opts.tau);
    let mut last_energy = f64::INFINITY;
    let mut previous = buf.clone();
    let mut v_eff = ham.potential.clone();
    for step in 1..=opts.max_steps {
        let check = step % CHECK_EVERY == 0;
        if check {
            previous.copy_from_slice(&buf);
        }
        if ham.g == 0.0 {
            stepper.step(&mut buf, &ham.potential, 0.0);
        } else {
            // Mean field of the normalized iterate, held fixed for the whole step.
            for ((w, v), a) in v_eff.iter_mut().zip(&ham.potential).zip(&buf) {
                *w = v + ham.g * a.norm_sqr();
            }
            stepper.step(&mut buf, &v_eff, 0.0);
        }
        project(&mut buf, parity);
        renormalize(&mut buf, dx)?;
        if check {
            let residual =
                (buf.iter().zip(&previous).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * dx).sqrt();
            let psi = Wavefunction::from_amplitudes(grid, buf.clone())?;
            let e = ham.energy(&psi)?;
            let per_step = (e - last_energy).abs() / CHECK_EVERY as f64;
            if per_step < opts.tolerance * e.abs().max(1.0) && residual < opts.state_tolerance {
                return Ok(psi);
            }
            last_energy = e;
        }
    }
    Err(Error::NoConvergence(opts.max_steps))
}

fn project(buf: &mut [Complex64], parity: Parity) {
    let n = buf.len();
    let sign = match parity {
        Parity::Any => return,
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let a = 0.5 * (buf[i] + sign * buf[j]);
        buf[i] = a;
        buf[j] = sign * a;
    }
}

fn renormalize(buf: &mut [Complex64], dx: f64) -> Result<()> {
    let norm = (buf.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::NonFinite);
    }
    let s = 1.0 / norm;
    buf.iter_mut().for_each(|a| *a *= s);
    Ok(())
}
