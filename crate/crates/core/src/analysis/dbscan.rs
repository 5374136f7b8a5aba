//! Density-based clustering with order-independent labels.

use std::cmp::Ordering;
use std::collections::VecDeque;

pub const NOISE: i64 = -1;

fn within(a: &[f64], b: &[f64], eps2: f64) -> bool {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
        if s > eps2 {
            return false;
        }
    }
    true
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Euclidean DBSCAN. A point is core when at least `min_samples` points, itself
/// included, lie within `eps`. Clusters are numbered from 0, noise is −1.
///
/// Points are visited in lexicographic order of their coordinates, so the labels
/// (including which cluster claims a border point reachable from two) do not
/// depend on input order.
pub fn dbscan(points: &[Vec<f64>], eps: f64, min_samples: usize) -> Vec<i64> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lexicographic(&points[a], &points[b]));
    let sorted: Vec<&[f64]> = order.iter().map(|&i| points[i].as_slice()).collect();

    let eps2 = eps * eps;
    let neighbours: Vec<Vec<usize>> = {
        let mut nb = vec![Vec::new(); n];
        for i in 0..n {
            nb[i].push(i);
            for j in i + 1..n {
                if within(sorted[i], sorted[j], eps2) {
                    nb[i].push(j);
                    nb[j].push(i);
                }
            }
        }
        for list in &mut nb {
            list.sort_unstable();
        }
        nb
    };
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= min_samples).collect();

    let mut labels = vec![NOISE; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if labels[start] != NOISE || !core[start] {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for &q in &neighbours[p] {
                if labels[q] == NOISE {
                    labels[q] = next;
                    if core[q] {
                        queue.push_back(q);
                    }
                }
            }
        }
        next += 1;
    }

    let mut out = vec![NOISE; n];
    for (k, &i) in order.iter().enumerate() {
        out[i] = labels[k];
    }
    out
}

/// Number of clusters and of noise points in a label vector.
pub fn summarize(labels: &[i64]) -> (usize, usize) {
    let clusters = labels.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
    (clusters, labels.iter().filter(|&&l| l == NOISE).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob(rng: &mut ChaCha8Rng, centre: [f64; 2], n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| vec![centre[0] + rng.random_range(-0.5..0.5), centre[1] + rng.random_range(-0.5..0.5)]).collect()
    }

    #[test]
    fn separated_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut pts = blob(&mut rng, [0.0, 0.0], 30);
        pts.extend(blob(&mut rng, [100.0, 0.0], 30));
        let labels = dbscan(&pts, 1.0, 5);
        assert_eq!(summarize(&labels), (2, 0));
        assert!(labels[..30].iter().all(|&l| l == labels[0]));
        assert!(labels[30..].iter().all(|&l| l == labels[30]));
    }

    #[test]
    fn identical_points_form_one_cluster() {
        let pts = vec![vec![1.0, 2.0, 3.0]; 12];
        assert_eq!(summarize(&dbscan(&pts, 1e-9, 5)), (1, 0));
        assert_eq!(summarize(&dbscan(&pts, 1e-9, 13)), (0, 12));
    }

    /// Reference: core points are joined by union-find over the ε-graph,
    /// border points must carry the label of some adjacent core point.
    fn check_against_reference(pts: &[Vec<f64>], eps: f64, min_samples: usize, labels: &[i64]) {
        let n = pts.len();
        let dist = |a: usize, b: usize| pts[a].iter().zip(&pts[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let adj = |a: usize, b: usize| dist(a, b) <= eps;
        let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| adj(i, j)).count() >= min_samples).collect();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for i in 0..n {
            for j in 0..n {
                if core[i] && core[j] && adj(i, j) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if core[i] && core[j] {
                    let same = find(&mut parent, i) == find(&mut parent, j);
                    assert_eq!(same, labels[i] == labels[j], "core pair {i},{j}");
                }
            }
        }
        for i in 0..n {
            if core[i] {
                assert!(labels[i] >= 0);
                continue;
            }
            let reachable: Vec<i64> = (0..n).filter(|&j| core[j] && adj(i, j)).map(|j| labels[j]).collect();
            if reachable.is_empty() {
                assert_eq!(labels[i], NOISE, "point {i} should be noise");
            } else {
                assert!(reachable.contains(&labels[i]), "border point {i}");
            }
        }
    }

    #[test]
    fn small_instances_match_reference() {
        for seed in 0..40 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(2..=30);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)]).collect();
            let eps = rng.random_range(0.3..1.5);
            let min_samples = rng.random_range(1..6);
            let labels = dbscan(&pts, eps, min_samples);
            check_against_reference(&pts, eps, min_samples, &labels);
        }
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            pts in proptest::collection::vec(proptest::collection::vec(0.0f64..4.0, 3), 1..40),
            eps in 0.2f64..1.5,
            min_samples in 1usize..6,
            key in any::<u64>(),
        ) {
            let labels = dbscan(&pts, eps, min_samples);
            let mut perm: Vec<usize> = (0..pts.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let shuffled: Vec<Vec<f64>> = perm.iter().map(|&i| pts[i].clone()).collect();
            let other = dbscan(&shuffled, eps, min_samples);
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(other[k], labels[i]);
            }
        }
    }
}
