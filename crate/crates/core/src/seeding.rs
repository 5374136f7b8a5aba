//! Seed generation: uniform random, binned random, preselection and cursor traces.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{evaluate_fidelity, ControlVector, Level, ProblemSpec};

/// How a seed was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeedKind {
    /// Uniform random per step.
    #[serde(rename = "RS")]
    Rs,
    /// Uniform random per bin of equal width.
    #[serde(rename = "RS_binned")]
    RsBinned(usize),
    /// Human trace.
    #[serde(rename = "PS")]
    Ps,
    /// Human-optimized trace.
    #[serde(rename = "PO")]
    Po,
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedKind::Rs => f.write_str("RS"),
            SeedKind::RsBinned(n) => write!(f, "RS_binned({n})"),
            SeedKind::Ps => f.write_str("PS"),
            SeedKind::Po => f.write_str("PO"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProvenance {
    pub kind: SeedKind,
    pub source: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl SeedProvenance {
    pub fn new(kind: SeedKind, source: impl Into<String>) -> Self {
        Self { kind, source: source.into(), metadata: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

fn pinned(problem: &ProblemSpec, values: Vec<Vec<f64>>) -> ControlVector {
    let mut c = ControlVector::from_raw(problem.dt, values, problem.bounds.clone(), problem.endpoints.clone())
        .expect("level shapes are consistent");
    c.pin_endpoints();
    c
}

/// Independent uniform draws within the bounds at every step, end points fixed.
pub fn random_seed(problem: &ProblemSpec, rng: &mut impl Rng) -> ControlVector {
    let values = problem
        .bounds
        .iter()
        .map(|&(lo, hi)| (0..problem.n_t).map(|_| rng.random_range(lo..=hi)).collect())
        .collect();
    pinned(problem, values)
}

/// Sample range `[start, end)` of bin `k` when `n` samples are split into `n_b` bins.
pub fn bin_range(n: usize, n_b: usize, k: usize) -> (usize, usize) {
    (k * n / n_b, (k + 1) * n / n_b)
}

/// One uniform draw per bin, constant within the bin, end points fixed.
///
/// With `n_b = n_t` every sample is its own bin and the draws coincide with
/// [`random_seed`] for the same random stream.
pub fn binned_random_seed(problem: &ProblemSpec, n_b: usize, rng: &mut impl Rng) -> Result<ControlVector> {
    if n_b == 0 || n_b > problem.n_t {
        return Err(Error::InvalidArgument(format!("bin count {n_b} outside 1..={}", problem.n_t)));
    }
    let values = problem
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            let mut s = vec![0.0; problem.n_t];
            for k in 0..n_b {
                let (a, b) = bin_range(problem.n_t, n_b, k);
                s[a..b].fill(rng.random_range(lo..=hi));
            }
            s
        })
        .collect();
    Ok(pinned(problem, values))
}

/// Random superposition of the lowest sine modes around the bound midpoints.
///
/// Not used by any acceptance workflow.
#[cfg(feature = "frequency-seeds")]
pub fn frequency_seed(problem: &ProblemSpec, n_modes: usize, rng: &mut impl Rng) -> ControlVector {
    let t_total = problem.duration;
    let values = problem
        .bounds
        .iter()
        .map(|&(lo, hi)| {
            let amps: Vec<f64> = (0..n_modes).map(|k| rng.random_range(-1.0..=1.0) / (k + 1) as f64).collect();
            (0..problem.n_t)
                .map(|j| {
                    let t = j as f64 * problem.dt / t_total;
                    let s: f64 =
                        amps.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * std::f64::consts::PI * t).sin()).sum();
                    (0.5 * (lo + hi) + 0.5 * (hi - lo) * s).clamp(lo, hi)
                })
                .collect()
        })
        .collect();
    pinned(problem, values)
}

/// The `n` items with the highest score, best first; ties keep their input order.
pub fn preselect<T>(mut scored: Vec<(T, f64)>, n: usize) -> Vec<(T, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.truncate(n);
    scored
}

/// Evaluates each seed once and keeps the `n` with the highest initial fidelity.
pub fn preselect_seeds(problem: &ProblemSpec, seeds: Vec<ControlVector>, n: usize) -> Result<Vec<(ControlVector, f64)>> {
    let scored = seeds
        .into_iter()
        .map(|c| evaluate_fidelity(problem, &c).map(|f| (c, f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(preselect(scored, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CursorSample {
    /// Time in milliseconds from the start of the level.
    pub ts: f64,
    /// Horizontal position in the control box, 0 = left edge, 1 = right edge.
    pub x: f64,
    /// Vertical position in the control box, 0 = bottom edge, 1 = top edge.
    pub y: f64,
}

/// A recorded cursor path; `x` drives `u1` and `y` drives `u2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CursorTrace {
    pub level: Level,
    /// Duration in milliseconds.
    #[serde(rename = "T")]
    pub duration_ms: f64,
    pub samples: Vec<CursorSample>,
}

impl CursorTrace {
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::InvalidTrace("empty trace".into()));
        }
        if !(self.duration_ms > 0.0 && self.duration_ms.is_finite()) {
            return Err(Error::InvalidTrace(format!("duration {} ms", self.duration_ms)));
        }
        for w in self.samples.windows(2) {
            if !(w[1].ts > w[0].ts) {
                return Err(Error::InvalidTrace(format!("timestamps not increasing at {} ms", w[1].ts)));
            }
        }
        for s in &self.samples {
            if !(s.ts.is_finite() && s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::InvalidTrace("non-finite sample".into()));
            }
        }
        Ok(())
    }
}

/// Linear interpolation of `(ts, value)` nodes at `t`, constant beyond the ends.
fn interpolate(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    if t <= ts[0] {
        return vs[0];
    }
    let last = ts.len() - 1;
    if t >= ts[last] {
        return vs[last];
    }
    let i = ts.partition_point(|&s| s <= t) - 1;
    if ts[i] == t {
        return vs[i];
    }
    let w = (t - ts[i]) / (ts[i + 1] - ts[i]);
    vs[i] + w * (vs[i + 1] - vs[i])
}

/// Maps screen coordinates linearly onto the control bounds and resamples onto the δt grid.
pub fn trace_to_control(trace: &CursorTrace, problem: &ProblemSpec) -> Result<ControlVector> {
    trace.validate()?;
    if trace.level != problem.level {
        return Err(Error::InvalidTrace(format!("trace for {} used on {}", trace.level, problem.level)));
    }
    let t_ms = problem.duration_ms();
    if (trace.duration_ms - t_ms).abs() > 0.01 * t_ms {
        return Err(Error::InvalidTrace(format!("trace lasts {} ms, level {} ms", trace.duration_ms, t_ms)));
    }
    let ts: Vec<f64> = trace.samples.iter().map(|s| s.ts).collect();
    let span = (ts[ts.len() - 1] - ts[0]).max(0.0);
    if ts.len() > 1 && (span - trace.duration_ms).abs() > 0.01 * trace.duration_ms {
        return Err(Error::InvalidTrace(format!("samples span {span} ms of {} ms", trace.duration_ms)));
    }
    let values = problem
        .param_names
        .iter()
        .zip(&problem.bounds)
        .map(|(name, &(lo, hi))| {
            let screen: Vec<f64> =
                trace.samples.iter().map(|s| if *name == "u1" { s.x } else { s.y }).collect();
            (0..problem.n_t)
                .map(|j| {
                    let t = problem.units.time_to_ms(j as f64 * problem.dt);
                    let c = interpolate(&ts, &screen, t);
                    (lo + c * (hi - lo)).clamp(lo, hi)
                })
                .collect()
        })
        .collect();
    Ok(pinned(problem, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::make_problem_ms;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bhw() -> ProblemSpec {
        make_problem_ms(Level::BringHomeWater, 0.1057).unwrap()
    }

    #[test]
    fn random_seed_statistics() {
        let p = bhw();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut above = 0usize;
        while n < 100_000 {
            let c = random_seed(&p, &mut rng);
            c.check_bounds().unwrap();
            c.check_endpoints().unwrap();
            for &v in &c.series(0)[1..p.n_t - 1] {
                sum += v;
                above += (v > 1.0) as usize;
                n += 1;
            }
        }
        // uniform on [-2, 2]: variance 4/3
        let sigma = (4.0f64 / 3.0 / n as f64).sqrt();
        assert!((sum / n as f64).abs() < 3.0 * sigma);
        let q = above as f64 / n as f64;
        assert!((q - 0.25).abs() < 3.0 * (0.25 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn full_binning_reproduces_random_seed() {
        let p = bhw();
        let a = random_seed(&p, &mut ChaCha8Rng::seed_from_u64(9));
        let b = binned_random_seed(&p, p.n_t, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_bin_is_constant() {
        let p = bhw();
        let c = binned_random_seed(&p, 1, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for s in c.values() {
            assert!(s[1..p.n_t - 1].iter().all(|&v| v == s[1]));
        }
        assert!(binned_random_seed(&p, 0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
        assert!(binned_random_seed(&p, p.n_t + 1, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn two_bins_first_half_probability() {
        let p = bhw();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 20_000;
        let hits = (0..trials)
            .filter(|_| binned_random_seed(&p, 2, &mut rng).unwrap().series(0)[1] > 1.0)
            .count();
        let q = hits as f64 / trials as f64;
        assert!((q - 0.25).abs() < 4.0 * (0.25 * 0.75 / trials as f64).sqrt(), "{q}");
    }

    #[test]
    fn back_swing_by_chance_is_vanishingly_rare() {
        // n = (T/10)/δt consecutive draws above x₀, T/10 = 0.01 sim units
        let n = 1e-2 / 3.5e-4;
        assert!((0.25f64.powf(n) / 6e-18 - 1.0).abs() < 0.1);
        assert!((0.25f64.powf(n / 4.0) / 5e-5 - 1.0).abs() < 0.1);
    }

    #[test]
    fn preselect_orders_and_truncates() {
        let items = vec![("a", 0.1), ("b", 0.5), ("c", 0.5), ("d", 0.3)];
        let top = preselect(items.clone(), 3);
        assert_eq!(top.iter().map(|x| x.0).collect::<Vec<_>>(), ["b", "c", "d"]);
        assert_eq!(preselect(items.clone(), 1)[0].0, "b");
        assert_eq!(preselect(items, 10).len(), 4);
    }

    fn trace(p: &ProblemSpec, f: impl Fn(f64) -> (f64, f64), n: usize) -> CursorTrace {
        let t = p.duration_ms();
        CursorTrace {
            level: p.level,
            duration_ms: t,
            samples: (0..n)
                .map(|i| {
                    let ts = t * i as f64 / (n - 1) as f64;
                    let (x, y) = f(ts / t);
                    CursorSample { ts, x, y }
                })
                .collect(),
        }
    }

    #[test]
    fn centered_cursor_gives_midpoint_control() {
        let p = bhw();
        let c = trace_to_control(&trace(&p, |_| (0.5, 0.5), 40), &p).unwrap();
        assert!(c.series(0)[1..p.n_t - 1].iter().all(|&v| v == 0.0));
        assert!(c.series(1)[1..p.n_t - 1].iter().all(|&v| v == -75.0));
        c.check_endpoints().unwrap();
    }

    #[test]
    fn grid_aligned_trace_is_identity() {
        let p = bhw();
        let tr = trace(&p, |s| (s, 1.0 - s), p.n_t);
        let c = trace_to_control(&tr, &p).unwrap();
        for j in 1..p.n_t - 1 {
            let x = tr.samples[j].x;
            assert!((c.series(0)[j] - (-2.0 + 4.0 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_sweep_is_a_ramp() {
        let p = bhw();
        let c = trace_to_control(&trace(&p, |s| (s, s), 7), &p).unwrap();
        for j in 1..p.n_t - 1 {
            let s = j as f64 / (p.n_t - 1) as f64;
            assert!((c.series(0)[j] - (-2.0 + 4.0 * s)).abs() < 1e-12);
            assert!((c.series(1)[j] - (-150.0 + 150.0 * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_errors() {
        let p = bhw();
        let mut tr = trace(&p, |_| (0.5, 0.5), 10);
        tr.samples.clear();
        assert!(trace_to_control(&tr, &p).is_err());
        let mut tr = trace(&p, |_| (0.5, 0.5), 10);
        tr.duration_ms *= 1.05;
        assert!(trace_to_control(&tr, &p).is_err());
        let mut tr = trace(&p, |_| (0.5, 0.5), 10);
        tr.samples[3].ts = tr.samples[2].ts;
        assert!(trace_to_control(&tr, &p).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn generated_seeds_are_valid(seed in any::<u64>(), n_b in 1usize..781) {
            let p = bhw();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = binned_random_seed(&p, n_b, &mut rng).unwrap();
            prop_assert!(c.check_bounds().is_ok());
            prop_assert!(c.check_endpoints().is_ok());
            let a = random_seed(&p, &mut ChaCha8Rng::seed_from_u64(seed));
            let b = random_seed(&p, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn clamped_traces_stay_in_bounds(xs in proptest::collection::vec((-0.5f64..1.5, -0.5f64..1.5), 2..50)) {
            let p = bhw();
            let n = xs.len();
            let t = p.duration_ms();
            let tr = CursorTrace {
                level: p.level,
                duration_ms: t,
                samples: xs.iter().enumerate().map(|(i, &(x, y))| CursorSample { ts: t * i as f64 / (n - 1) as f64, x, y }).collect(),
            };
            let c = trace_to_control(&tr, &p).unwrap();
            prop_assert!(c.check_bounds().is_ok());
            prop_assert!(c.check_endpoints().is_ok());
        }
    }
}
