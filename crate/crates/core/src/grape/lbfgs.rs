use std::collections::VecDeque;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS history with the two-loop recursion.
#[derive(Debug, Clone)]
pub(crate) struct Lbfgs {
    memory: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
}

impl Lbfgs {
    pub(crate) fn new(memory: usize) -> Self {
        Self { memory, pairs: VecDeque::with_capacity(memory) }
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub(crate) fn reset(&mut self) {
        self.pairs.clear();
    }

    /// Stores a curvature pair; pairs violating s·y > 0 are skipped.
    pub(crate) fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        if self.memory == 0 || !(sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt()) {
            return false;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// Quasi-Newton descent direction -H·grad restricted to entries where `free` is set.
    pub(crate) fn direction(&self, grad: &[f64], free: &[bool]) -> Vec<f64> {
        let mask = |v: &mut Vec<f64>| v.iter_mut().zip(free).for_each(|(x, &f)| if !f { *x = 0.0 });
        let mut q = grad.to_vec();
        mask(&mut q);
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|x| *x *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q.iter_mut().for_each(|x| *x = -*x);
        mask(&mut q);
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The implied inverse Hessian satisfies the secant equation of the newest pair.
    #[test]
    fn satisfies_latest_secant_equation() {
        let h = [[4.0, 1.0, 0.0], [1.0, 3.0, 0.5], [0.0, 0.5, 2.0]];
        let grad = |x: &[f64]| (0..3).map(|i| (0..3).map(|j| h[i][j] * x[j]).sum()).collect::<Vec<f64>>();
        let mut lb = Lbfgs::new(10);
        for s in [[1.0, 0.0, 0.0], [0.2, 1.0, 0.0], [0.1, -0.4, 1.0]] {
            assert!(lb.push(s.to_vec(), grad(&s)));
        }
        let s = [0.1, -0.4, 1.0];
        let d = lb.direction(&grad(&s), &[true; 3]);
        for i in 0..3 {
            assert!((d[i] + s[i]).abs() < 1e-12, "{d:?}");
        }
    }

    #[test]
    fn empty_history_is_steepest_descent() {
        let lb = Lbfgs::new(5);
        let d = lb.direction(&[1.0, -2.0, 3.0], &[true, false, true]);
        assert_eq!(d, vec![-1.0, 0.0, -3.0]);
    }

    #[test]
    fn rejects_negative_curvature() {
        let mut lb = Lbfgs::new(2);
        assert!(!lb.push(vec![1.0, 0.0], vec![-1.0, 0.0]));
        assert!(lb.is_empty());
        assert!(lb.push(vec![1.0, 0.0], vec![1.0, 0.0]));
        assert!(lb.push(vec![0.0, 1.0], vec![0.0, 1.0]));
        assert!(lb.push(vec![1.0, 1.0], vec![1.0, 1.0]));
        assert_eq!(lb.pairs.len(), 2);
    }
}
