//! Fidelity quantiles over wall time across a batch of runs.

use serde::Serialize;

use crate::optim::IterationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileRow {
    pub wall_s: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    /// Runs that had reported at least one iteration by this time.
    pub active: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (pos - i as f64) * (sorted[i + 1] - sorted[i])
}

/// Best fidelity a run had reached at time `t`, holding its final value after it ends.
fn best_at(history: &[IterationRecord], t: f64) -> Option<f64> {
    history.iter().take_while(|r| r.wall_s <= t).map(|r| r.fidelity).reduce(f64::max)
}

/// 25/50/75 % fidelity quantiles at each time in `times`.
pub fn fidelity_quantiles(runs: &[Vec<IterationRecord>], times: &[f64]) -> Vec<QuantileRow> {
    times
        .iter()
        .map(|&t| {
            let mut fs: Vec<f64> = runs.iter().filter_map(|h| best_at(h, t)).collect();
            fs.sort_by(f64::total_cmp);
            if fs.is_empty() {
                return QuantileRow { wall_s: t, q25: f64::NAN, median: f64::NAN, q75: f64::NAN, active: 0 };
            }
            QuantileRow {
                wall_s: t,
                q25: quantile(&fs, 0.25),
                median: quantile(&fs, 0.5),
                q75: quantile(&fs, 0.75),
                active: fs.len(),
            }
        })
        .collect()
}

/// Mean wall time of one complete iteration over all runs.
pub fn mean_iteration_time(runs: &[Vec<IterationRecord>]) -> Option<f64> {
    let (time, iters) = runs.iter().fold((0.0, 0usize), |(t, n), h| match (h.first(), h.last()) {
        (Some(a), Some(b)) if b.iteration > a.iteration => (t + b.wall_s - a.wall_s, n + b.iteration - a.iteration),
        _ => (t, n),
    });
    (iters > 0).then(|| time / iters as f64)
}

pub fn write_csv<W: std::io::Write>(rows: &[QuantileRow], out: W) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["wall_s", "q25", "median", "q75", "active"]).map_err(super::kde::csv_err)?;
    for r in rows {
        w.serialize((r.wall_s, r.q25, r.median, r.q75, r.active)).map_err(super::kde::csv_err)?;
    }
    w.flush()?;
    Ok(())
}
