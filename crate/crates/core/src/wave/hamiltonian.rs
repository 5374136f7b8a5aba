use serde::{Deserialize, Serialize};

use super::function::Wavefunction;
use super::grid::SpatialGrid;
use crate::error::{Error, Result};

/// `H = -κ ∂²/∂x² + V(x) + g|ψ|²` on a fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kappa: f64,
    pub potential: Vec<f64>,
    pub g: f64,
    pub grid: SpatialGrid,
}

impl HamiltonianSpec {
    pub fn new(grid: SpatialGrid, kappa: f64, potential: Vec<f64>, g: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa = {kappa} must be positive")));
        }
        if potential.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "potential has {} samples on a {}-point grid",
                potential.len(),
                grid.len()
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("potential must be finite".into()));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidArgument(format!("g = {g} must be >= 0")));
        }
        Ok(Self { kappa, potential, g, grid })
    }

    pub fn from_fn(grid: SpatialGrid, kappa: f64, g: f64, v: impl Fn(f64) -> f64) -> Result<Self> {
        let potential = grid.points().into_iter().map(v).collect();
        Self::new(grid, kappa, potential, g)
    }

    /// Whether V is mirror-symmetric about the grid center to relative `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.potential.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        (0..self.grid.len()).all(|i| {
            (self.potential[i] - self.potential[self.grid.mirror(i)]).abs() <= tol * scale
        })
    }

    /// Mean-field energy functional ⟨T⟩ + ⟨V⟩ + (g/2)∫|ψ|⁴.
    pub fn energy(&self, psi: &Wavefunction) -> Result<f64> {
        let (kin, pot, inter) = self.energy_terms(psi)?;
        Ok(kin + pot + 0.5 * inter)
    }

    /// Chemical potential ⟨T⟩ + ⟨V⟩ + g∫|ψ|⁴; equals the energy when g = 0.
    pub fn chemical_potential(&self, psi: &Wavefunction) -> Result<f64> {
        let (kin, pot, inter) = self.energy_terms(psi)?;
        Ok(kin + pot + inter)
    }

    fn energy_terms(&self, psi: &Wavefunction) -> Result<(f64, f64, f64)> {
        self.grid.ensure_same(psi.grid())?;
        let dx = self.grid.dx();
        let kin = super::split_step::kinetic_expectation(psi, self.kappa);
        let mut pot = 0.0;
        let mut inter = 0.0;
        for (a, v) in psi.amplitudes().iter().zip(&self.potential) {
            let rho = a.norm_sqr();
            pot += v * rho;
            inter += self.g * rho * rho;
        }
        Ok((kin, pot * dx, inter * dx))
    }
}
