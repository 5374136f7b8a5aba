use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled control functions on the δt grid, one series per control parameter.
///
/// `values[p][j]` is parameter `p` at time `j·dt`; both end points are included
/// so a duration `T` has `round(T/dt) + 1` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlVector {
    pub dt: f64,
    values: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
    endpoints: Vec<(f64, f64)>,
}

impl ControlVector {
    /// Builds a control and checks every invariant (shape, bounds, end points).
    pub fn new(dt: f64, values: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>, endpoints: Vec<(f64, f64)>) -> Result<Self> {
        let c = Self::from_raw(dt, values, bounds, endpoints)?;
        c.check_bounds()?;
        c.check_endpoints()?;
        Ok(c)
    }

    /// Builds a control checking only its shape; callers validate before use.
    pub fn from_raw(dt: f64, values: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>, endpoints: Vec<(f64, f64)>) -> Result<Self> {
        if values.is_empty() || values.len() != bounds.len() || values.len() != endpoints.len() {
            return Err(Error::InvalidArgument("control parameter count mismatch".into()));
        }
        let n = values[0].len();
        if n < 2 || values.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidArgument("control series must share a length >= 2".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
        }
        Ok(Self { dt, values, bounds, endpoints })
    }

    pub fn n_params(&self) -> usize {
        self.values.len()
    }

    /// Number of time samples n_t.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn series(&self, p: usize) -> &[f64] {
        &self.values[p]
    }

    pub fn series_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.values[p]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn endpoints(&self) -> &[(f64, f64)] {
        &self.endpoints
    }

    /// Control values of every parameter at step `j`.
    pub fn at(&self, j: usize, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.values) {
            *o = s[j];
        }
    }

    pub fn check_bounds(&self) -> Result<()> {
        for (p, (s, &(lo, hi))) in self.values.iter().zip(&self.bounds).enumerate() {
            if let Some((j, &v)) = s.iter().enumerate().find(|(_, v)| !(**v >= lo && **v <= hi)) {
                return Err(Error::BoundViolation { param: p, step: j, value: v, min: lo, max: hi });
            }
        }
        Ok(())
    }

    pub fn check_endpoints(&self) -> Result<()> {
        for (p, (s, &(a, b))) in self.values.iter().zip(&self.endpoints).enumerate() {
            let last = *s.last().expect("non-empty");
            if s[0] != a {
                return Err(Error::EndpointViolation { param: p, expected: a, got: s[0] });
            }
            if last != b {
                return Err(Error::EndpointViolation { param: p, expected: b, got: last });
            }
        }
        Ok(())
    }

    /// Overwrites the first and last samples with the fixed end-point values.
    pub fn pin_endpoints(&mut self) {
        for (s, &(a, b)) in self.values.iter_mut().zip(&self.endpoints) {
            s[0] = a;
            *s.last_mut().expect("non-empty") = b;
        }
    }

    pub fn clamp(&mut self) {
        for (s, &(lo, hi)) in self.values.iter_mut().zip(&self.bounds) {
            s.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
    }

    /// Control mapped linearly so that every bound interval becomes [0, 1].
    pub fn to_normalized(&self) -> Vec<Vec<f64>> {
        self.values
            .iter()
            .zip(&self.bounds)
            .map(|(s, &b)| s.iter().map(|&v| normalize(v, b)).collect())
            .collect()
    }

    /// Replaces the values from normalized coordinates (no clamping, no validation).
    pub fn set_normalized(&mut self, normalized: &[Vec<f64>]) {
        for ((s, n), &b) in self.values.iter_mut().zip(normalized).zip(&self.bounds) {
            for (v, &x) in s.iter_mut().zip(n) {
                *v = denormalize(x, b);
            }
        }
    }
}

#[inline]
pub fn normalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    (v - lo) / (hi - lo)
}

#[inline]
pub fn denormalize(x: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + x * (hi - lo)
}

/// Number of samples for duration `t` at step `dt`, including both end points.
pub fn sample_count(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize + 1
}
