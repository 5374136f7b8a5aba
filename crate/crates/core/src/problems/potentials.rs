//! Level potentials and their derivatives with respect to the controls.

use crate::error::{Error, Result};
use crate::wave::SpatialGrid;

/// Optical tweezer pair: one movable (u₁ position, u₂ depth) and one static.
pub mod tweezer {
    pub const SIGMA: f64 = 0.5;
    pub const X0: f64 = 1.0;
    pub const A: f64 = -130.0;
    pub const U1_BOUNDS: (f64, f64) = (-2.0, 2.0);
    pub const U2_BOUNDS: (f64, f64) = (-150.0, 0.0);
    pub const ENDPOINT: (f64, f64) = (-1.0, -130.0);

    #[inline]
    pub fn gauss(x: f64, c: f64) -> f64 {
        let d = x - c;
        (-2.0 * d * d / (SIGMA * SIGMA)).exp()
    }

    /// Harmonic frequency of the fully overlapped tweezers with movable depth `u2`.
    pub fn overlapped_frequency(u2: f64) -> f64 {
        (-4.0 * (A + u2) / (SIGMA * SIGMA)).sqrt()
    }
}

/// Anharmonic atom-chip trap displaced by u₁.
pub mod shakeup {
    pub const P2: f64 = 65.8392;
    pub const P4: f64 = 97.6349;
    pub const P6: f64 = -15.3850;
    pub const G: f64 = 1.8299;
    pub const U1_BOUNDS: (f64, f64) = (-1.0, 1.0);
}

/// Radio-frequency dressed atom-chip potential; u₂ raises the central barrier.
pub mod splitting {
    pub const P: f64 = 8794.1;
    pub const B_OMEGA: f64 = 0.9;
    pub const GR: f64 = 0.2;
    pub const B_I: f64 = 1.0;
    pub const G: f64 = 1.8299;
    pub const U2_BOUNDS: (f64, f64) = (0.0, 1.0);

    #[inline]
    pub fn b_static(x: f64) -> f64 {
        ((GR * x).powi(2) + B_I * B_I).sqrt()
    }
}

fn check(value: f64, (lo, hi): (f64, f64), param: usize) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::BoundViolation { param, step: 0, value, min: lo, max: hi })
    }
}

/// V(x) = u₂ e^{-2(x-u₁)²/σ²} + A e^{-2(x-x₀)²/σ²}.
pub fn bhw_potential(u1: f64, u2: f64, grid: &SpatialGrid) -> Result<Vec<f64>> {
    check(u1, tweezer::U1_BOUNDS, 0)?;
    check(u2, tweezer::U2_BOUNDS, 1)?;
    let mut out = vec![0.0; grid.len()];
    bhw_into(u1, u2, grid, &mut out);
    Ok(out)
}

/// V(x) = Σ_{r=2,4,6} p_r (x - u₁)^r.
pub fn shakeup_potential(u1: f64, grid: &SpatialGrid) -> Result<Vec<f64>> {
    check(u1, shakeup::U1_BOUNDS, 0)?;
    let mut out = vec![0.0; grid.len()];
    shakeup_into(u1, grid, &mut out);
    Ok(out)
}

/// V(x) = p sqrt((B_S - B_ω)² + ((0.5 + 0.3u₂)/(2 B_S) B_I)²), B_S = sqrt((Gr x)² + B_I²).
pub fn splitting_potential(u2: f64, grid: &SpatialGrid) -> Result<Vec<f64>> {
    check(u2, splitting::U2_BOUNDS, 0)?;
    let mut out = vec![0.0; grid.len()];
    splitting_into(u2, grid, &mut out);
    Ok(out)
}

pub(crate) fn bhw_into(u1: f64, u2: f64, grid: &SpatialGrid, out: &mut [f64]) {
    for (i, v) in out.iter_mut().enumerate() {
        let x = grid.x(i);
        *v = u2 * tweezer::gauss(x, u1) + tweezer::A * tweezer::gauss(x, tweezer::X0);
    }
}

/// Movable-tweezer term only (used for the target state).
pub(crate) fn bhw_movable_into(u1: f64, u2: f64, grid: &SpatialGrid, out: &mut [f64]) {
    for (i, v) in out.iter_mut().enumerate() {
        *v = u2 * tweezer::gauss(grid.x(i), u1);
    }
}

/// Static-tweezer term only (used for the initial state).
pub(crate) fn bhw_static_into(grid: &SpatialGrid, out: &mut [f64]) {
    for (i, v) in out.iter_mut().enumerate() {
        *v = tweezer::A * tweezer::gauss(grid.x(i), tweezer::X0);
    }
}

pub(crate) fn bhw_du1_into(u1: f64, u2: f64, grid: &SpatialGrid, out: &mut [f64]) {
    let s2 = tweezer::SIGMA * tweezer::SIGMA;
    for (i, v) in out.iter_mut().enumerate() {
        let x = grid.x(i);
        *v = u2 * tweezer::gauss(x, u1) * 4.0 * (x - u1) / s2;
    }
}

pub(crate) fn bhw_du2_into(u1: f64, grid: &SpatialGrid, out: &mut [f64]) {
    for (i, v) in out.iter_mut().enumerate() {
        *v = tweezer::gauss(grid.x(i), u1);
    }
}

pub(crate) fn shakeup_into(u1: f64, grid: &SpatialGrid, out: &mut [f64]) {
    for (i, v) in out.iter_mut().enumerate() {
        let d2 = (grid.x(i) - u1).powi(2);
        *v = d2 * (shakeup::P2 + d2 * (shakeup::P4 + d2 * shakeup::P6));
    }
}

pub(crate) fn shakeup_du1_into(u1: f64, grid: &SpatialGrid, out: &mut [f64]) {
    for (i, v) in out.iter_mut().enumerate() {
        let d = grid.x(i) - u1;
        let d2 = d * d;
        *v = -d * (2.0 * shakeup::P2 + d2 * (4.0 * shakeup::P4 + d2 * 6.0 * shakeup::P6));
    }
}

pub(crate) fn splitting_into(u2: f64, grid: &SpatialGrid, out: &mut [f64]) {
    use splitting::*;
    let c = 0.5 + 0.3 * u2;
    for (i, v) in out.iter_mut().enumerate() {
        let bs = b_static(grid.x(i));
        let rf = c / (2.0 * bs) * B_I;
        *v = P * ((bs - B_OMEGA).powi(2) + rf * rf).sqrt();
    }
}

pub(crate) fn splitting_du2_into(u2: f64, grid: &SpatialGrid, out: &mut [f64]) {
    use splitting::*;
    let c = 0.5 + 0.3 * u2;
    for (i, v) in out.iter_mut().enumerate() {
        let bs = b_static(grid.x(i));
        let rf = c / (2.0 * bs) * B_I;
        let root = ((bs - B_OMEGA).powi(2) + rf * rf).sqrt();
        *v = P * rf * (0.3 * B_I / (2.0 * bs)) / root;
    }
}
