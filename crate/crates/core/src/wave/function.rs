use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::SpatialGrid;
use crate::error::{Error, Result};

/// Complex amplitudes sampled on a [`SpatialGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wavefunction {
    grid: SpatialGrid,
    amplitudes: Vec<Complex64>,
}

impl Wavefunction {
    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(grid: SpatialGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes on a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    /// Samples `f` on the grid and normalizes the result.
    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = grid.points().into_iter().map(f).collect();
        let mut psi = Self { grid, amplitudes };
        psi.normalize()?;
        Ok(psi)
    }

    /// Normalized Gaussian `exp(-(x-x0)²/(4 s²))` with momentum `k0`.
    pub fn gaussian(grid: SpatialGrid, x0: f64, width: f64, k0: f64) -> Result<Self> {
        Self::from_fn(grid, |x| {
            let env = (-(x - x0).powi(2) / (4.0 * width * width)).exp();
            Complex64::from_polar(env, k0 * x)
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NonFinite);
        }
        let s = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(())
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Position expectation value ⟨x⟩ = Σ x_i |ψ_i|² dx.
    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.grid.x(i) * a.norm_sqr())
            .sum::<f64>()
            * dx
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, amplitudes: self.amplitudes.iter().map(|a| a * c).collect() }
    }

    /// Sign changes of the real part after removing the global phase of the
    /// largest amplitude, ignoring samples below `threshold` in magnitude.
    pub fn node_count(&self, threshold: f64) -> usize {
        let peak = self
            .amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = if peak.norm() > 0.0 { peak.conj() / peak.norm() } else { Complex64::new(1.0, 0.0) };
        let mut last = 0.0_f64;
        let mut count = 0;
        for a in &self.amplitudes {
            let v = (a * phase).re;
            if v.abs() < threshold {
                continue;
            }
            if last != 0.0 && v.signum() != last.signum() {
                count += 1;
            }
            last = v;
        }
        count
    }
}

/// ⟨a|b⟩ = Σ conj(a_i) b_i dx.
pub fn inner_product(a: &Wavefunction, b: &Wavefunction) -> Result<Complex64> {
    a.grid.ensure_same(&b.grid)?;
    Ok(raw_inner(&a.amplitudes, &b.amplitudes) * a.grid.dx())
}

/// |⟨a|b⟩|², invariant under the global phase of either argument.
pub fn fidelity(a: &Wavefunction, b: &Wavefunction) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Σ conj(a_i) b_i without the dx factor.
pub(crate) fn raw_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
