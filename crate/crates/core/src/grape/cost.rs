use serde::{Deserialize, Serialize};

use super::adjoint::Adjoint;
use super::GrapeConfig;
use crate::error::{Error, Result};
use crate::problems::{ControlVector, ProblemSpec};

/// The three terms of the GRAPE cost, all in normalized control coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostTerms {
    pub infidelity: f64,
    /// (γ/2) Σ_p ∫ (dv_p/dt)² dt with forward differences.
    pub derivative: f64,
    /// (σ/2) Σ_p ∫ d_p(t)² dt, d_p the distance outside [0, 1].
    pub boundary: f64,
}

impl CostTerms {
    pub fn total(&self) -> f64 {
        self.infidelity + self.derivative + self.boundary
    }
}

fn overshoot(v: f64) -> f64 {
    if v > 1.0 {
        v - 1.0
    } else if v < 0.0 {
        v
    } else {
        0.0
    }
}

/// Derivative and boundary penalties of normalized series `v`.
pub(crate) fn penalties(v: &[Vec<f64>], dt: f64, gamma: f64, sigma: f64) -> (f64, f64) {
    let mut derivative = 0.0;
    let mut boundary = 0.0;
    for s in v {
        derivative += s.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / dt;
        boundary += s.iter().map(|&x| overshoot(x).powi(2)).sum::<f64>() * dt;
    }
    (0.5 * gamma * derivative, 0.5 * sigma * boundary)
}

/// Adds the gradients of [`penalties`] to `grad`.
pub(crate) fn add_penalty_gradient(v: &[Vec<f64>], dt: f64, gamma: f64, sigma: f64, grad: &mut [Vec<f64>]) {
    for (s, g) in v.iter().zip(grad.iter_mut()) {
        let n = s.len();
        for j in 0..n {
            let mut d = 0.0;
            if j > 0 {
                d += s[j] - s[j - 1];
            }
            if j + 1 < n {
                d -= s[j + 1] - s[j];
            }
            g[j] += gamma / dt * d + sigma * dt * overshoot(s[j]);
        }
    }
}

fn check_shape(problem: &ProblemSpec, control: &ControlVector) -> Result<()> {
    if control.len() != problem.n_t {
        return Err(Error::LengthMismatch { expected: problem.n_t, got: control.len() });
    }
    if control.n_params() != problem.n_params() {
        return Err(Error::InvalidArgument("control parameter count does not match the level".into()));
    }
    Ok(())
}

/// Evaluates every cost term. Out-of-bounds samples are allowed and penalized.
pub fn cost_terms(problem: &ProblemSpec, control: &ControlVector, config: &GrapeConfig) -> Result<CostTerms> {
    check_shape(problem, control)?;
    let f = Adjoint::new(problem).forward(control);
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let (derivative, boundary) = penalties(&control.to_normalized(), problem.dt, config.gamma, config.sigma_bound);
    Ok(CostTerms { infidelity: 1.0 - f, derivative, boundary })
}

pub fn cost(problem: &ProblemSpec, control: &ControlVector, config: &GrapeConfig) -> Result<f64> {
    cost_terms(problem, control, config).map(|t| t.total())
}

/// ∂J/∂v for every sample of every parameter, v the normalized control.
///
/// End-point entries are included; the optimizer zeroes them.
pub fn gradient(problem: &ProblemSpec, control: &ControlVector, config: &GrapeConfig) -> Result<Vec<Vec<f64>>> {
    check_shape(problem, control)?;
    let mut adj = Adjoint::new(problem);
    let f = adj.forward(control);
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut grad = adj.backward(control);
    normalized_gradient(&mut grad, control.bounds());
    add_penalty_gradient(&control.to_normalized(), problem.dt, config.gamma, config.sigma_bound, &mut grad);
    Ok(grad)
}

/// Turns ∂F/∂u into ∂(1 − F)/∂v in place.
pub(crate) fn normalized_gradient(grad: &mut [Vec<f64>], bounds: &[(f64, f64)]) {
    for (g, &(lo, hi)) in grad.iter_mut().zip(bounds) {
        g.iter_mut().for_each(|x| *x *= -(hi - lo));
    }
}
