//! Speed-limit estimates from randomly subsampled solution sets.
//!
//! Each trial draws a fixed number of solutions from the window
//! [0.8, 1.2]·T_ref, keeps the best one in each of 15 equal sub-intervals,
//! fits log₁₀(1 − F) linearly in T and reads off where the fit crosses
//! F = 0.99. A trial succeeds when that crossing lies inside the window.

use log::debug;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::fit::linear_fit;
use super::kde::log_infidelity;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QslOptions {
    /// Reference speed limit in ms; the window is `window.0·t_ref ..= window.1·t_ref`.
    pub t_ref: f64,
    pub n_samples: usize,
    pub n_trials: usize,
    pub sub_intervals: usize,
    pub window: (f64, f64),
    pub f_target: f64,
    pub seed: u64,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

impl QslOptions {
    pub fn new(t_ref: f64, n_samples: usize) -> Self {
        Self {
            t_ref,
            n_samples,
            n_trials: 1000,
            sub_intervals: 15,
            window: (0.8, 1.2),
            f_target: 0.99,
            seed: 0,
            threads: 0,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.window.0 * self.t_ref, self.window.1 * self.t_ref)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QslEstimate {
    /// Mean fitted crossing over successful trials, in ms.
    pub mean_t_fit: Option<f64>,
    /// `mean_t_fit / t_ref`.
    pub mean_relative: Option<f64>,
    pub success_probability: f64,
    pub n_samples: usize,
    pub n_trials: usize,
    pub successes: usize,
    /// Trials whose sample left fewer than two distinct durations to fit.
    pub discarded: usize,
    pub interval: (f64, f64),
    pub t_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Success(f64),
    Extrapolated,
    Discarded,
}

fn sub_interval(t: f64, (lo, hi): (f64, f64), n: usize) -> usize {
    (((t - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1)
}

/// Best (T, F) per sub-interval of one trial's sample.
pub fn trial_bests(pool: &[(f64, f64)], opts: &QslOptions, trial: u64) -> Vec<Option<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(trial);
    let k = opts.n_samples.min(pool.len());
    let interval = opts.interval();
    let mut best: Vec<Option<(f64, f64)>> = vec![None; opts.sub_intervals];
    for i in sample(&mut rng, pool.len(), k) {
        let (t, f) = pool[i];
        let slot = &mut best[sub_interval(t, interval, opts.sub_intervals)];
        if slot.is_none_or(|b| f > b.1) {
            *slot = Some((t, f));
        }
    }
    best
}

fn run_trial(pool: &[(f64, f64)], opts: &QslOptions, trial: u64) -> Outcome {
    let bests: Vec<(f64, f64)> = trial_bests(pool, opts, trial).into_iter().flatten().collect();
    let xs: Vec<f64> = bests.iter().map(|b| b.0).collect();
    let ys: Vec<f64> = bests.iter().map(|b| log_infidelity(b.1)).collect();
    let Some((a, b)) = (if xs.len() >= 2 { linear_fit(&xs, &ys) } else { None }) else {
        debug!("trial {trial}: fewer than two distinct durations, discarded");
        return Outcome::Discarded;
    };
    if b == 0.0 {
        return Outcome::Extrapolated;
    }
    let t_fit = ((1.0 - opts.f_target).log10() - a) / b;
    let (lo, hi) = opts.interval();
    if t_fit >= lo && t_fit <= hi {
        Outcome::Success(t_fit)
    } else {
        Outcome::Extrapolated
    }
}

/// Runs the sampling procedure on (T, F) pairs with T in ms.
pub fn qsl_sampling(points: &[(f64, f64)], opts: &QslOptions) -> Result<QslEstimate> {
    if !(opts.t_ref > 0.0) || opts.n_samples == 0 || opts.n_trials == 0 || opts.sub_intervals == 0 {
        return Err(Error::InvalidArgument(format!("invalid sampling options {opts:?}")));
    }
    let (lo, hi) = opts.interval();
    let pool: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 >= lo && p.0 <= hi).collect();
    if pool.is_empty() {
        return Err(Error::InvalidArgument(format!("no solutions with T in [{lo}, {hi}] ms")));
    }
    if pool.len() < opts.n_samples {
        log::warn!("only {} solutions in the window, fewer than {} samples", pool.len(), opts.n_samples);
    }

    let threads = match opts.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(opts.n_trials);
    let mut outcomes = vec![Outcome::Discarded; opts.n_trials];
    let chunk = opts.n_trials.div_ceil(threads);
    std::thread::scope(|s| {
        for (c, out) in outcomes.chunks_mut(chunk).enumerate() {
            let pool = &pool;
            s.spawn(move || {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = run_trial(pool, opts, (c * chunk + i) as u64);
                }
            });
        }
    });

    let fits: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match o {
            Outcome::Success(t) => Some(*t),
            _ => None,
        })
        .collect();
    let discarded = outcomes.iter().filter(|o| **o == Outcome::Discarded).count();
    let mean = (!fits.is_empty()).then(|| fits.iter().sum::<f64>() / fits.len() as f64);
    Ok(QslEstimate {
        mean_t_fit: mean,
        mean_relative: mean.map(|m| m / opts.t_ref),
        success_probability: fits.len() as f64 / opts.n_trials as f64,
        n_samples: opts.n_samples,
        n_trials: opts.n_trials,
        successes: fits.len(),
        discarded,
        interval: (lo, hi),
        t_ref: opts.t_ref,
    })
}

impl QslEstimate {
    /// CSV row `n_samples,mean_t_fit,mean_relative,success_probability,successes,discarded,n_trials`.
    pub fn write_csv<W: std::io::Write>(rows: &[QslEstimate], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n_samples", "mean_t_fit", "mean_relative", "success_probability", "successes", "discarded", "n_trials"])
            .map_err(super::kde::csv_err)?;
        for r in rows {
            w.serialize((r.n_samples, r.mean_t_fit, r.mean_relative, r.success_probability, r.successes, r.discarded, r.n_trials))
                .map_err(super::kde::csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
