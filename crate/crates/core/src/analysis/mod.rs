//! Post-hoc analysis of solution archives: densities, best-so-far curves,
//! strategy clustering, trade-off fits, cosine modes and sampled speed limits.

pub mod cluster;
pub mod cosine;
pub mod dbscan;
pub mod fit;
pub mod kde;
pub mod monotone;
pub mod qsl;
pub mod quantiles;
mod record;

pub use cluster::{cluster_records, prepare_bhw_clustering, ClusterPreset, Clustering, Features};
pub use cosine::{cosine_decompose, dominant_mode};
pub use dbscan::dbscan;
pub use fit::{exp_gap_fit, exp_gap_fit_points, ExpFit, BHW_T_REF};
pub use kde::{kde_at, kde_density, kde_density_points, log_infidelity, DensityMap, KdeOptions, INFIDELITY_FLOOR};
pub use monotone::{monotone_best, monotone_best_points, speed_limit};
pub use qsl::{qsl_sampling, QslEstimate, QslOptions};
pub use quantiles::{fidelity_quantiles, mean_iteration_time, QuantileRow};
pub use record::SolutionRecord;
