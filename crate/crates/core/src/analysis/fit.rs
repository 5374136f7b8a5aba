//! Exponential fidelity-duration trade-off fits.

use serde::Serialize;

use super::kde::log_infidelity;
use super::record::SolutionRecord;
use crate::error::{Error, Result};

/// BHW reference duration (ms) of the gap fits.
pub const BHW_T_REF: f64 = 0.0929;

/// 1 − F(T) = 10^{a + b (T − t_ref)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub t_ref: f64,
}

impl ExpFit {
    pub fn log_infidelity(&self, t: f64) -> f64 {
        self.a + self.b * (t - self.t_ref)
    }

    /// Duration at which the fit reaches fidelity `f`, if the slope is nonzero.
    pub fn crossing(&self, f: f64) -> Option<f64> {
        if self.b == 0.0 {
            return None;
        }
        Some(self.t_ref + ((1.0 - f).log10() - self.a) / self.b)
    }
}

/// Ordinary least squares y = a + b x. `None` when all x coincide.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Least-squares fit of log₁₀(1 − F) against T − t_ref.
pub fn exp_gap_fit_points(points: &[(f64, f64)], t_ref: f64) -> Result<ExpFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!("{} points, need at least 3", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0 - t_ref).collect();
    let ys: Vec<f64> = points.iter().map(|p| log_infidelity(p.1)).collect();
    let (a, b) = linear_fit(&xs, &ys).ok_or_else(|| Error::Degenerate("all records share one duration".into()))?;
    Ok(ExpFit { a, b, t_ref })
}

pub fn exp_gap_fit(records: &[&SolutionRecord], t_ref: f64) -> Result<ExpFit> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.duration_ms, r.fidelity)).collect();
    exp_gap_fit_points(&points, t_ref)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let t = 0.093 + 0.031 * i as f64 / (n - 1) as f64;
                (t, 1.0 - 10f64.powf(a + b * (t - BHW_T_REF)))
            })
            .collect()
    }

    #[test]
    fn recovers_front_and_back_swing_coefficients() {
        for (a, b) in [(-1.45, -50.11), (-1.50, -117.27)] {
            let fit = exp_gap_fit_points(&synthetic(a, b, 25), BHW_T_REF).unwrap();
            assert!((fit.a - a).abs() < 1e-6, "{fit:?}");
            assert!((fit.b - b).abs() < 1e-6, "{fit:?}");
        }
        let ratio: f64 = -117.27 / -50.11;
        assert!((ratio - 2.34).abs() < 0.005);
    }

    #[test]
    fn constant_fidelity_has_zero_slope() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (0.1 + 0.01 * i as f64, 0.97)).collect();
        let fit = exp_gap_fit_points(&pts, BHW_T_REF).unwrap();
        assert!(fit.b.abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(exp_gap_fit_points(&[(0.1, 0.9), (0.2, 0.95)], BHW_T_REF).is_err());
        assert!(exp_gap_fit_points(&[(0.1, 0.9), (0.1, 0.95), (0.1, 0.5)], BHW_T_REF).is_err());
    }

    #[test]
    fn crossing_of_exact_line() {
        let fit = ExpFit { a: -1.0, b: -100.0, t_ref: 0.09 };
        assert!((fit.crossing(0.99).unwrap() - 0.1).abs() < 1e-12);
    }
}
