use serde::{Deserialize, Serialize};

use crate::problems::ControlVector;
use crate::seeding::bin_range;

/// Piecewise-constant values of one parameter over the free samples `1..n_t-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedControl {
    param: usize,
    /// Bin `k` covers samples `edges[k]..edges[k + 1]`.
    edges: Vec<usize>,
    values: Vec<f64>,
    expanded: ControlVector,
}

impl BinnedControl {
    /// Bins parameter `param` of `control` by bin means; `frozen` parameters get constant interior values.
    pub fn from_control(control: &ControlVector, param: usize, n_b: usize, frozen: &[(usize, f64)]) -> Self {
        let n_t = control.len();
        let m = n_t - 2;
        let n_b = n_b.clamp(1, m);
        let mut edges: Vec<usize> = (0..n_b).map(|k| 1 + bin_range(m, n_b, k).0).collect();
        edges.push(n_t - 1);
        let mut expanded = control.clone();
        for &(p, v) in frozen {
            expanded.series_mut(p)[1..n_t - 1].fill(v);
        }
        let s = control.series(param);
        let values = edges.windows(2).map(|e| s[e[0]..e[1]].iter().sum::<f64>() / (e[1] - e[0]) as f64).collect();
        let mut out = Self { param, edges, values, expanded };
        for k in 0..n_b {
            out.set(k, out.values[k]);
        }
        out
    }

    pub fn param(&self) -> usize {
        self.param
    }

    pub fn n_bins(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sample (and step) range of bin `k`.
    pub fn range(&self, k: usize) -> (usize, usize) {
        (self.edges[k], self.edges[k + 1])
    }

    /// Distinct bin widths in ascending order.
    pub fn widths(&self) -> Vec<usize> {
        let mut w: Vec<usize> = self.edges.windows(2).map(|e| e[1] - e[0]).collect();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn set(&mut self, k: usize, value: f64) {
        self.values[k] = value;
        let (a, b) = self.range(k);
        self.expanded.series_mut(self.param)[a..b].fill(value);
    }

    pub fn expanded(&self) -> &ControlVector {
        &self.expanded
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn control(n: usize) -> ControlVector {
        let mut c = ControlVector::from_raw(
            0.1,
            vec![(0..n).map(|j| j as f64 / n as f64).collect(), vec![-1.0; n]],
            vec![(0.0, 1.0), (-2.0, 0.0)],
            vec![(0.0, 0.5), (-1.0, -1.0)],
        )
        .unwrap();
        c.pin_endpoints();
        c
    }

    #[test]
    fn bins_cover_free_samples() {
        let c = control(23);
        for n_b in [1, 2, 4, 7, 21, 100] {
            let b = BinnedControl::from_control(&c, 0, n_b, &[]);
            assert_eq!(b.range(0).0, 1);
            assert_eq!(b.range(b.n_bins() - 1).1, 22);
            let widths = b.widths();
            assert!(widths.len() <= 2 && widths[widths.len() - 1] - widths[0] <= 1);
            let e = b.expanded();
            assert_eq!(e.series(0)[0], 0.0);
            assert_eq!(e.series(0)[22], 0.5);
            for k in 0..b.n_bins() {
                let (lo, hi) = b.range(k);
                assert!(e.series(0)[lo..hi].iter().all(|&v| v == b.values()[k]));
            }
        }
    }

    #[test]
    fn frozen_parameter_is_constant_inside() {
        let b = BinnedControl::from_control(&control(10), 0, 3, &[(1, -2.0)]);
        let s = b.expanded().series(1);
        assert_eq!(s[0], -1.0);
        assert_eq!(s[9], -1.0);
        assert!(s[1..9].iter().all(|&v| v == -2.0));
    }
}
