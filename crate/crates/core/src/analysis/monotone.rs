//! Running best infidelity as a function of duration.

use super::record::SolutionRecord;

/// Step curve of (T, best 1 − F over all records with duration ≤ T), one point per distinct T.
pub fn monotone_best(records: &[SolutionRecord]) -> Vec<(f64, f64)> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.duration_ms, r.fidelity)).collect();
    monotone_best_points(&points)
}

/// [`monotone_best`] on bare (T, F) pairs.
pub fn monotone_best_points(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for (t, f) in sorted {
        best = best.max(f);
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 = 1.0 - best,
            _ => out.push((t, 1.0 - best)),
        }
    }
    out
}

/// Shortest duration on the curve whose best fidelity reaches `f`.
pub fn speed_limit(curve: &[(f64, f64)], f: f64) -> Option<f64> {
    curve.iter().find(|p| 1.0 - p.1 >= f).map(|p| p.0)
}
