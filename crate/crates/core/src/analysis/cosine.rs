//! Cosine-mode content of a control relative to the atom position.

use crate::error::{Error, Result};

pub const N_MODES: usize = 6;

/// c_k = (1/T) ∫₀ᵀ (u − ⟨x⟩) cos(πkt/T) dt for k = 0..5, by the trapezoidal rule
/// on the uniformly sampled series.
pub fn cosine_decompose(u: &[f64], x: &[f64]) -> Result<[f64; N_MODES]> {
    if u.len() != x.len() {
        return Err(Error::LengthMismatch { expected: u.len(), got: x.len() });
    }
    if u.len() < 2 {
        return Err(Error::InvalidArgument("cosine decomposition needs at least two samples".into()));
    }
    let m = u.len() - 1;
    let mut c = [0.0; N_MODES];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..=m {
            let w = if j == 0 || j == m { 0.5 } else { 1.0 };
            let phase = std::f64::consts::PI * k as f64 * j as f64 / m as f64;
            s += w * (u[j] - x[j]) * phase.cos();
        }
        *ck = s / m as f64;
    }
    Ok(c)
}

/// Index of the largest |c_k|.
pub fn dominant_mode(c: &[f64; N_MODES]) -> usize {
    (0..N_MODES).max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs())).unwrap_or(0)
}

/// Oscillation count N_k = k/2 of mode k.
pub fn oscillations(k: usize) -> f64 {
    k as f64 / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn single_mode() {
        let a = 0.37;
        let s = grid(501);
        let u: Vec<f64> = s.iter().map(|t| a * (3.0 * PI * t).cos()).collect();
        let c = cosine_decompose(&u, &vec![0.0; u.len()]).unwrap();
        assert!((c[3] - a / 2.0).abs() < 1e-12);
        for k in [0, 1, 2, 4, 5] {
            assert!(c[k].abs() < 1e-10 * a, "c{k} = {}", c[k]);
        }
        assert_eq!(dominant_mode(&c), 3);
        assert_eq!(oscillations(3), 1.5);
    }

    #[test]
    fn constant_offset() {
        let x: Vec<f64> = grid(101).iter().map(|t| t.sin()).collect();
        let u: Vec<f64> = x.iter().map(|v| v + 0.25).collect();
        let c = cosine_decompose(&u, &x).unwrap();
        assert!((c[0] - 0.25).abs() < 1e-14);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn two_mode_signal_matches_closed_form() {
        // f(s) = s + 0.5 sin(π s); (1/T)∫ f cos(πks) over s ∈ [0, 1]:
        //   ∫ s cos(πks) = ((−1)^k − 1)/(πk)² for k ≥ 1, 1/2 for k = 0
        //   ∫ sin(πs) cos(πks) = (1 + (−1)^k)/(π(1 − k²)) for k ≠ 1, 0 for k = 1
        let s = grid(2001);
        let u: Vec<f64> = s.iter().map(|&t| t + 0.5 * (PI * t).sin()).collect();
        let c = cosine_decompose(&u, &vec![0.0; u.len()]).unwrap();
        for k in 0..N_MODES {
            let kf = k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let lin = if k == 0 { 0.5 } else { (sign - 1.0) / (PI * kf).powi(2) };
            let sin = if k == 1 { 0.0 } else { (1.0 + sign) / (PI * (1.0 - kf * kf)) };
            let want = lin + 0.5 * sin;
            assert!((c[k] - want).abs() < 1e-6, "c{k}: {} vs {want}", c[k]);
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(cosine_decompose(&[0.0, 1.0], &[0.0]).is_err());
    }

    proptest! {
        #[test]
        fn linear_in_signal(
            a in proptest::collection::vec(-1.0f64..1.0, 30),
            b in proptest::collection::vec(-1.0f64..1.0, 30),
            alpha in -3.0f64..3.0,
        ) {
            let zero = vec![0.0; 30];
            let ca = cosine_decompose(&a, &zero).unwrap();
            let cb = cosine_decompose(&b, &zero).unwrap();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| alpha * x + y).collect();
            let cm = cosine_decompose(&mix, &zero).unwrap();
            for k in 0..N_MODES {
                prop_assert!((cm[k] - (alpha * ca[k] + cb[k])).abs() < 1e-12);
            }
        }
    }
}
