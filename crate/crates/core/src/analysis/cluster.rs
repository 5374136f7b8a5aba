//! Strategy clustering of optimized controls.

use log::warn;
use serde::Serialize;

use super::cosine::cosine_decompose;
use super::dbscan::{dbscan, summarize};
use super::record::SolutionRecord;
use crate::error::{Error, Result};

/// Number of points every duration-normalized control is resampled to.
pub const RESAMPLED_POINTS: usize = 1000;

/// Feature vector extracted from each selected record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Features {
    /// Control parameter over t/T, optionally with the initial delay removed,
    /// resampled to [`RESAMPLED_POINTS`].
    Resampled { param: &'static str, strip_delay: bool },
    /// Cosine coefficients c₀..c₅ of u(t) − ⟨x(t)⟩.
    Cosine,
}

/// Selection window, DBSCAN parameters and feature choice for one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterPreset {
    pub name: &'static str,
    pub eps: f64,
    pub min_samples: usize,
    /// Duration window in ms.
    pub t_range: (f64, f64),
    pub t_inclusive: bool,
    pub f_range: (f64, f64),
    pub f_inclusive: bool,
    pub features: Features,
}

impl ClusterPreset {
    pub fn bhw_paper() -> Self {
        Self {
            name: "bhw_paper",
            eps: 3.0,
            min_samples: 5,
            t_range: (0.093, 0.124),
            t_inclusive: true,
            f_range: (0.95, 0.999),
            f_inclusive: true,
            features: Features::Resampled { param: "u1", strip_delay: true },
        }
    }

    pub fn splitting_paper() -> Self {
        Self {
            name: "splitting_paper",
            eps: 5.0,
            min_samples: 5,
            t_range: (0.0, f64::INFINITY),
            t_inclusive: true,
            f_range: (0.0, 1.0),
            f_inclusive: true,
            features: Features::Resampled { param: "u2", strip_delay: false },
        }
    }

    pub fn shakeup_paper() -> Self {
        Self {
            name: "shakeup_paper",
            eps: 0.1,
            min_samples: 250,
            t_range: (0.267, 1.068),
            t_inclusive: false,
            f_range: (0.6, 1.0),
            f_inclusive: false,
            features: Features::Cosine,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        [Self::bhw_paper(), Self::splitting_paper(), Self::shakeup_paper()].into_iter().find(|p| p.name == name)
    }

    pub fn selects(&self, r: &SolutionRecord) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64), inclusive: bool| {
            if inclusive {
                v >= lo && v <= hi
            } else {
                v > lo && v < hi
            }
        };
        // The upper fidelity bound of the open window is F = 1 itself.
        let f_ok = if self.f_inclusive {
            inside(r.fidelity, self.f_range, true)
        } else {
            r.fidelity > self.f_range.0 && r.fidelity <= self.f_range.1
        };
        inside(r.duration_ms, self.t_range, self.t_inclusive) && f_ok
    }
}

/// Drops every sample before the first one with value ≥ 0. `None` if there is none.
pub fn strip_delay(u: &[f64]) -> Option<&[f64]> {
    u.iter().position(|&v| v >= 0.0).map(|i| &u[i..])
}

/// Linear resampling of `u`, taken as uniformly spaced on [0, 1], onto `n` points.
pub fn resample(u: &[f64], n: usize) -> Vec<f64> {
    if u.len() == 1 {
        return vec![u[0]; n];
    }
    let m = u.len() - 1;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                return u[m];
            }
            let s = i as f64 * m as f64 / (n - 1) as f64;
            let j = (s.floor() as usize).min(m - 1);
            let w = s - j as f64;
            u[j] * (1.0 - w) + u[j + 1] * w
        })
        .collect()
}

/// Duration-normalized, delay-stripped u₁(t/T) resampled to 1000 points.
///
/// Records outside the preset window are skipped. Returns the index of each
/// kept record alongside its vector.
pub fn prepare_bhw_clustering(records: &[SolutionRecord]) -> Vec<(usize, Vec<f64>)> {
    let preset = ClusterPreset::bhw_paper();
    records
        .iter()
        .enumerate()
        .filter(|(_, r)| preset.selects(r))
        .filter_map(|(i, r)| features(r, preset.features).map(|v| (i, v)))
        .collect()
}

fn features(r: &SolutionRecord, kind: Features) -> Option<Vec<f64>> {
    match kind {
        Features::Resampled { param, strip_delay: strip } => {
            let u = r.series(param)?;
            let u = if strip {
                match strip_delay(u) {
                    Some(s) => s,
                    None => {
                        warn!("record {} never reaches {param} >= 0, excluded from clustering", r.id);
                        return None;
                    }
                }
            } else {
                u
            };
            Some(resample(u, RESAMPLED_POINTS))
        }
        Features::Cosine => {
            let x = r.expectation.as_ref();
            let u = r.series("u1");
            match (u, x) {
                (Some(u), Some(x)) => cosine_decompose(u, x).ok().map(|c| c.to_vec()),
                _ => {
                    warn!("record {} has no position expectation, excluded from clustering", r.id);
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    pub preset: ClusterPreset,
    /// Index into the input records of each clustered point.
    pub indices: Vec<usize>,
    pub labels: Vec<i64>,
    pub n_clusters: usize,
    pub n_noise: usize,
}

/// Selects, featurizes and clusters records according to `preset`.
pub fn cluster_records(records: &[SolutionRecord], preset: &ClusterPreset) -> Result<Clustering> {
    let selected: Vec<(usize, Vec<f64>)> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| preset.selects(r))
        .filter_map(|(i, r)| features(r, preset.features).map(|v| (i, v)))
        .collect();
    if selected.iter().any(|(_, v)| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidArgument("non-finite feature vector".into()));
    }
    let (indices, points): (Vec<usize>, Vec<Vec<f64>>) = selected.into_iter().unzip();
    let labels = dbscan(&points, preset.eps, preset.min_samples);
    let (n_clusters, n_noise) = summarize(&labels);
    Ok(Clustering { preset: *preset, indices, labels, n_clusters, n_noise })
}

impl Clustering {
    /// Input record indices of cluster `label`.
    pub fn members(&self, label: i64) -> Vec<usize> {
        self.indices.iter().zip(&self.labels).filter(|(_, &l)| l == label).map(|(&i, _)| i).collect()
    }

    /// CSV with columns `id,T,F,label`.
    pub fn write_csv<W: std::io::Write>(&self, records: &[SolutionRecord], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "T", "F", "label"]).map_err(super::kde::csv_err)?;
        for (&i, &l) in self.indices.iter().zip(&self.labels) {
            let r = &records[i];
            w.serialize((&r.id, r.duration_ms, r.fidelity, l)).map_err(super::kde::csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}
