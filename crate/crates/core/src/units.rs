//! Conversion between SI and dimensionless simulation units.
//!
//! The working equation is `i dψ/dt = -κ ψ'' + V ψ + g|ψ|²ψ` with ħ = m = 1.
//! Fixing two of {κ, length unit, time unit} determines the third through
//! `κ = ħ μ_time / (2 μ_mass μ_length²)`.

use serde::{Deserialize, Serialize};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit in kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of a rubidium-87 atom in kg.
pub const RB87_MASS: f64 = 86.909_180_527 * AMU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimUnits {
    /// Meters per simulation length unit.
    pub mu_length: f64,
    /// Seconds per simulation time unit.
    pub mu_time: f64,
    /// Kilograms per simulation mass unit.
    pub mu_mass: f64,
    pub kappa: f64,
}

impl SimUnits {
    /// Units fixed by κ and the length unit; the time unit follows.
    pub fn from_kappa_length(kappa: f64, mu_length: f64, mu_mass: f64) -> Self {
        let mu_time = 2.0 * mu_mass * kappa * mu_length * mu_length / HBAR;
        Self { mu_length, mu_time, mu_mass, kappa }
    }

    /// Units fixed by the length and time units; κ follows.
    pub fn from_length_time(mu_length: f64, mu_time: f64, mu_mass: f64) -> Self {
        let kappa = HBAR * mu_time / (2.0 * mu_mass * mu_length * mu_length);
        Self { mu_length, mu_time, mu_mass, kappa }
    }

    /// Units fixed by κ and the time unit; the length unit follows.
    pub fn from_kappa_time(kappa: f64, mu_time: f64, mu_mass: f64) -> Self {
        let mu_length = (HBAR * mu_time / (2.0 * mu_mass * kappa)).sqrt();
        Self { mu_length, mu_time, mu_mass, kappa }
    }

    /// Joules per simulation energy unit (ħ / μ_time).
    pub fn mu_energy(&self) -> f64 {
        HBAR / self.mu_time
    }

    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.mu_time
    }

    pub fn time_from_si(&self, seconds: f64) -> f64 {
        seconds / self.mu_time
    }

    pub fn time_to_ms(&self, t: f64) -> f64 {
        t * self.mu_time * 1e3
    }

    pub fn time_from_ms(&self, ms: f64) -> f64 {
        ms * 1e-3 / self.mu_time
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.mu_length
    }

    pub fn length_from_si(&self, meters: f64) -> f64 {
        meters / self.mu_length
    }

    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.mu_energy()
    }

    pub fn energy_from_si(&self, joules: f64) -> f64 {
        joules / self.mu_energy()
    }
}
