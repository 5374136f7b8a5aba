//! Solution densities in the (T, log₁₀(1 − F)) plane.

use serde::Serialize;

use super::record::SolutionRecord;
use crate::error::{Error, Result};

/// log₁₀(1 − F) assigned to records with F = 1 (and anything closer to it).
pub const INFIDELITY_FLOOR: f64 = -6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeOptions {
    /// Kernel half-width in decades of infidelity.
    pub bandwidth: f64,
    /// Uniform duration bins over the record span.
    pub t_bins: usize,
    /// Cells of the log-infidelity axis.
    pub y_cells: usize,
}

impl Default for KdeOptions {
    fn default() -> Self {
        Self { bandwidth: 0.08, t_bins: 40, y_cells: 310 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMap {
    /// Duration bin edges in ms, `t_bins + 1` values.
    pub t_edges: Vec<f64>,
    /// Log-infidelity cell edges, `y_cells + 1` values.
    pub y_edges: Vec<f64>,
    /// `density[i][c]`: cell-averaged density of column `i` in cell `c`.
    pub density: Vec<Vec<f64>>,
    /// Records per column.
    pub counts: Vec<usize>,
}

/// K(v) = 0.75 (1 − v²) on |v| ≤ 1.
pub fn epanechnikov(v: f64) -> f64 {
    if v.abs() <= 1.0 {
        0.75 * (1.0 - v * v)
    } else {
        0.0
    }
}

/// ∫_{-1}^{v} K.
fn epanechnikov_cdf(v: f64) -> f64 {
    let v = v.clamp(-1.0, 1.0);
    0.5 + 0.75 * v - 0.25 * v * v * v
}

/// log₁₀(1 − F) with the declared floor.
pub fn log_infidelity(f: f64) -> f64 {
    let eps = 1.0 - f;
    if eps <= 10f64.powf(INFIDELITY_FLOOR) {
        INFIDELITY_FLOOR
    } else {
        eps.log10()
    }
}

/// Pointwise kernel density estimate (1/(n h)) Σ K((y − yᵢ)/h).
pub fn kde_at(samples: &[f64], bandwidth: f64, y: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let sum: f64 = samples.iter().map(|s| epanechnikov((y - s) / bandwidth)).sum();
    sum / (samples.len() as f64 * bandwidth)
}

/// Mean of the kernel density estimate over [lo, hi].
pub fn kde_cell(samples: &[f64], bandwidth: f64, lo: f64, hi: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mass: f64 = samples
        .iter()
        .map(|s| epanechnikov_cdf((hi - s) / bandwidth) - epanechnikov_cdf((lo - s) / bandwidth))
        .sum();
    mass / (samples.len() as f64 * (hi - lo))
}

fn uniform_edges(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Bin index of `t` in uniform edges, the last bin closed on the right.
fn bin_of(edges: &[f64], t: f64) -> usize {
    let n = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n]);
    if hi <= lo {
        return 0;
    }
    (((t - lo) / (hi - lo) * n as f64).floor() as usize).min(n - 1)
}

/// Per-duration-column densities of log₁₀(1 − F), each column normalized on its own.
pub fn kde_density(records: &[SolutionRecord], options: &KdeOptions) -> Result<DensityMap> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.duration_ms, r.fidelity)).collect();
    kde_density_points(&points, options)
}

/// [`kde_density`] on bare (T, F) pairs.
pub fn kde_density_points(points: &[(f64, f64)], options: &KdeOptions) -> Result<DensityMap> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("density of an empty record set".into()));
    }
    if !(options.bandwidth > 0.0) || options.t_bins == 0 || options.y_cells == 0 {
        return Err(Error::InvalidArgument(format!("invalid density options {options:?}")));
    }
    let t_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let t_edges = uniform_edges(t_min, t_max, options.t_bins);
    let h = options.bandwidth;
    let y_edges = uniform_edges(INFIDELITY_FLOOR - h, h, options.y_cells);

    let mut columns = vec![Vec::new(); options.t_bins];
    for &(t, f) in points {
        columns[bin_of(&t_edges, t)].push(log_infidelity(f));
    }
    let density = columns
        .iter()
        .map(|col| y_edges.windows(2).map(|w| kde_cell(col, h, w[0], w[1])).collect())
        .collect();
    Ok(DensityMap { t_edges, y_edges, density, counts: columns.iter().map(Vec::len).collect() })
}

impl DensityMap {
    /// Σ density × cell width of one column.
    pub fn column_mass(&self, i: usize) -> f64 {
        self.density[i].iter().zip(self.y_edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum()
    }

    /// CSV with columns `t_lo,t_hi,y_lo,y_hi,count,density`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_lo", "t_hi", "y_lo", "y_hi", "count", "density"]).map_err(csv_err)?;
        for (i, col) in self.density.iter().enumerate() {
            for (c, d) in col.iter().enumerate() {
                w.serialize((
                    self.t_edges[i],
                    self.t_edges[i + 1],
                    self.y_edges[c],
                    self.y_edges[c + 1],
                    self.counts[i],
                    d,
                ))
                .map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}
