use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_x: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if n_x < 2 || !n_x.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n_x = {n_x} must be a power of two >= 2")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!("empty interval [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n_x })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_x
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    /// Angular wavenumbers in FFT order: 0, 1, .., n/2-1, -n/2, .., -1 (times 2π / (n dx)).
    pub fn momenta(&self) -> Vec<f64> {
        let n = self.n_x as i64;
        let dk = 2.0 * PI / (self.n_x as f64 * self.dx());
        (0..n)
            .map(|i| if i < n / 2 { i } else { i - n })
            .map(|m| m as f64 * dk)
            .collect()
    }

    /// Index of the mirror point about the grid center.
    pub fn mirror(&self, i: usize) -> usize {
        self.n_x - 1 - i
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    pub(crate) fn ensure_same(&self, other: &SpatialGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(SpatialGrid::new(-1.0, 1.0, 100).is_err());
        assert!(SpatialGrid::new(-1.0, 1.0, 1).is_err());
        assert!(SpatialGrid::new(1.0, -1.0, 64).is_err());
    }

    #[test]
    fn spacing_includes_endpoints() {
        let g = SpatialGrid::new(-3.0, 3.0, 256).unwrap();
        assert!((g.dx() - 6.0 / 255.0).abs() < 1e-15);
        assert!((g.x(255) - 3.0).abs() < 1e-12);
        assert!((g.x(g.mirror(10)) + g.x(10)).abs() < 1e-12);
    }

    #[test]
    fn momenta_symmetric() {
        let g = SpatialGrid::new(-2.0, 2.0, 16).unwrap();
        let k = g.momenta();
        assert_eq!(k[0], 0.0);
        for m in 1..8 {
            assert!((k[m] + k[16 - m]).abs() < 1e-12);
        }
        assert!(k[8] < 0.0);
    }
}
