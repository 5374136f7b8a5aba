//! Precomputed single-bin propagators for every candidate value (linear dynamics).

use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::problems::{ProblemSpec, Propagator};

pub(crate) struct BinPropagators {
    n: usize,
    /// `exp(-i dt V_c)` for every candidate.
    diagonals: Vec<Vec<Complex64>>,
    /// Column-major bin propagators per width (≥ 2) and candidate.
    matrices: Vec<(usize, Vec<Vec<Complex64>>)>,
}

impl BinPropagators {
    fn build(problem: &ProblemSpec, param: usize, u: &[f64], candidates: &[f64], widths: &[usize]) -> Self {
        let n = problem.grid.len();
        let mut u = u.to_vec();
        let mut prop = Propagator::new(problem);
        let mut potentials = Vec::with_capacity(candidates.len());
        let diagonals = candidates
            .iter()
            .map(|&c| {
                u[param] = c;
                let v = problem.potential(&u);
                let d = v
                    .iter()
                    .map(|&vi| {
                        let (s, co) = (-problem.dt * vi).sin_cos();
                        Complex64::new(co, s)
                    })
                    .collect();
                potentials.push(v);
                d
            })
            .collect();
        let matrices = widths
            .iter()
            .filter(|&&w| w >= 2)
            .map(|&w| {
                let per_candidate = potentials
                    .iter()
                    .map(|v| {
                        let mut m = vec![Complex64::default(); n * n];
                        for (i, col) in m.chunks_mut(n).enumerate() {
                            col[i] = Complex64::new(1.0, 0.0);
                            prop.advance_static(v, w, col);
                        }
                        m
                    })
                    .collect();
                (w, per_candidate)
            })
            .collect();
        Self { n, diagonals, matrices }
    }

    pub(crate) fn diagonal(&self, c: usize) -> &[Complex64] {
        &self.diagonals[c]
    }

    pub(crate) fn matrices(&self, width: usize) -> Option<&[Vec<Complex64>]> {
        self.matrices.iter().find(|(w, _)| *w == width).map(|(_, m)| m.as_slice())
    }

    /// `out = M_c ψ`.
    pub(crate) fn apply(&self, m: &[Vec<Complex64>], c: usize, psi: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::default());
        for (col, &p) in m[c].chunks(self.n).zip(psi) {
            if p == Complex64::default() {
                continue;
            }
            out.iter_mut().zip(col).for_each(|(o, x)| *o += p * x);
        }
    }
}

#[derive(PartialEq)]
struct Key {
    level: crate::problems::Level,
    grid: (u64, u64, usize),
    dt: u64,
    kappa: u64,
    param: usize,
    u: Vec<u64>,
    candidates: Vec<u64>,
    widths: Vec<usize>,
}

/// Recently built propagator sets, shared between runs on the same level and binning.
static CACHE: Mutex<Vec<(Key, Arc<BinPropagators>)>> = Mutex::new(Vec::new());
const CACHE_ENTRIES: usize = 2;

pub(crate) fn shared(
    problem: &ProblemSpec,
    param: usize,
    u: &[f64],
    candidates: &[f64],
    widths: &[usize],
) -> Arc<BinPropagators> {
    let g = problem.grid;
    let key = Key {
        level: problem.level,
        grid: (g.x(0).to_bits(), g.x(g.len() - 1).to_bits(), g.len()),
        dt: problem.dt.to_bits(),
        kappa: problem.kappa().to_bits(),
        param,
        u: u.iter().map(|x| x.to_bits()).collect(),
        candidates: candidates.iter().map(|x| x.to_bits()).collect(),
        widths: widths.to_vec(),
    };
    let mut cache = CACHE.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(pos) = cache.iter().position(|(k, _)| *k == key) {
        let entry = cache.remove(pos);
        let out = Arc::clone(&entry.1);
        cache.push(entry);
        return out;
    }
    let built = Arc::new(BinPropagators::build(problem, param, u, candidates, widths));
    if cache.len() == CACHE_ENTRIES {
        cache.remove(0);
    }
    cache.push((key, Arc::clone(&built)));
    built
}
