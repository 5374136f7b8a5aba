//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The default scale fits a single-core machine: cheap criteria run as stated,
//! campaign criteria run with fewer seeds and shorter budgets and are reported
//! but do not fail the run. `QMOVES_ACCEPTANCE_SCALE=full` runs every criterion
//! at its stated scale and makes all of them binding. Positional arguments
//! select criteria whose name contains one of them.

use std::cell::OnceCell;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmoves::analysis::{
    cluster_records, cosine_decompose, dominant_mode, exp_gap_fit, fidelity_quantiles, qsl_sampling, ClusterPreset,
    QslOptions, SolutionRecord, BHW_T_REF,
};
use qmoves::grape::{cost_terms, gradient, GrapeConfig};
use qmoves::optim::{IterationRecord, StopSignal};
use qmoves::problems::{evaluate_fidelity, make_problem, make_problem_ms, make_problem_on_grid, Level, ProblemSpec, Propagator};
use qmoves::sa::{self, SaConfig, SaState};
use qmoves::seeding::{binned_random_seed, random_seed, SeedKind, SeedProvenance};
use qmoves::store::{run_batch, BatchConfig, BatchSeed, Method};
use qmoves::wave::{excited_state, ground_state, HamiltonianSpec, SpatialGrid, StationaryOptions};

struct Outcome {
    pass: bool,
    /// The verdict rests on reduced-scale data.
    reduced: bool,
    detail: String,
}

impl Outcome {
    fn stated(pass: bool, detail: String) -> Self {
        Self { pass, reduced: false, detail }
    }
}

struct Ctx {
    full: bool,
    bhw: OnceCell<BhwCampaign>,
}

impl Ctx {
    fn pick<T>(&self, full: T, reduced: T) -> T {
        if self.full {
            full
        } else {
            reduced
        }
    }

    fn outcome(&self, pass: bool, detail: String) -> Outcome {
        Outcome { pass, reduced: !self.full, detail }
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Bin count drawn log-uniformly from 2..=n_t.
fn mixed_bins(n_t: usize, rng: &mut ChaCha8Rng) -> usize {
    let v = rng.random_range(2f64.ln()..=(n_t as f64).ln()).exp().round() as usize;
    v.clamp(2, n_t)
}

fn rs_seeds(p: &ProblemSpec, count: usize, base: u64) -> Vec<BatchSeed> {
    (0..count as u64)
        .map(|i| {
            let s = base + i;
            BatchSeed {
                control: random_seed(p, &mut ChaCha8Rng::seed_from_u64(s)),
                provenance: SeedProvenance::new(SeedKind::Rs, "acceptance"),
                rng_seed: Some(s),
            }
        })
        .collect()
}

/// Binned seeds; `n_b = None` draws each bin count from the log-uniform mixture.
fn binned_seeds(p: &ProblemSpec, count: usize, n_b: Option<usize>, base: u64) -> Vec<BatchSeed> {
    (0..count as u64)
        .map(|i| {
            let s = base + i;
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let n = n_b.unwrap_or_else(|| mixed_bins(p.n_t, &mut rng));
            BatchSeed {
                control: binned_random_seed(p, n, &mut rng).unwrap(),
                provenance: SeedProvenance::new(SeedKind::RsBinned(n), "acceptance"),
                rng_seed: Some(s),
            }
        })
        .collect()
}

fn optimize(p: &ProblemSpec, seeds: &[BatchSeed], method: Method, n_b: Option<usize>, budget: f64, expectation: bool) -> Vec<SolutionRecord> {
    if seeds.is_empty() {
        return Vec::new();
    }
    let config = BatchConfig {
        method,
        sa: SaConfig { n_b, ..SaConfig::default() },
        min_budget: budget,
        workers: workers(),
        record_expectation: expectation,
        ..BatchConfig::default()
    };
    let out = run_batch(p, seeds, &config, &StopSignal::new(), &|_, _| {}).unwrap();
    out.archive.into_records().into_iter().filter(|r| r.error.is_none()).collect()
}

fn best(records: &[SolutionRecord]) -> f64 {
    records.iter().map(|r| r.fidelity).fold(f64::NEG_INFINITY, f64::max)
}

// ---------------------------------------------------------------- cheap criteria

fn gradient_correctness(_: &Ctx) -> Outcome {
    let mut worst = [0.0f64; 3];
    for (li, level) in Level::ALL.into_iter().enumerate() {
        let dt = make_problem_on_grid(level, 1.0, Some(64)).unwrap().dt;
        let p = make_problem_on_grid(level, 40.0 * dt, Some(64)).unwrap();
        let config = GrapeConfig::default();
        let cost = |c: &qmoves::problems::ControlVector| cost_terms(&p, c, &config).unwrap().total();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + li as u64);
        for _ in 0..10 {
            let c = random_seed(&p, &mut rng);
            let g = gradient(&p, &c, &config).unwrap();
            let x = c.to_normalized();
            let h = 1e-5;
            let (mut num, mut den) = (0.0, 0.0);
            for k in 0..p.n_params() {
                for j in 1..p.n_t - 1 {
                    // Central differences need both neighbours inside the box.
                    if x[k][j] - h < 0.0 || x[k][j] + h > 1.0 {
                        continue;
                    }
                    let shifted = |d: f64| {
                        let mut v = x.clone();
                        v[k][j] += d;
                        let mut cc = c.clone();
                        cc.set_normalized(&v);
                        cost(&cc)
                    };
                    let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                    num += (fd - g[k][j]).powi(2);
                    den += g[k][j].powi(2);
                }
            }
            worst[li] = worst[li].max((num / den).sqrt());
        }
    }
    let pass = worst[0] < 1e-5 && worst[1] < 1e-4 && worst[2] < 1e-5;
    Outcome::stated(pass, format!("max relative L2 error bhw {:.1e}, splitting {:.1e}, shakeup {:.1e}", worst[0], worst[1], worst[2]))
}

fn sa_cache_equivalence(_: &Ctx) -> Outcome {
    let p = make_problem_ms(Level::BringHomeWater, 0.1057).unwrap();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for n_b in [Some(40), None] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seed = random_seed(&p, &mut rng);
        let config = SaConfig { n_b, ..SaConfig::default() };
        let mut state = SaState::new(&p, &seed, &config).unwrap();
        let n = state.n_bins();
        // Visit bins far apart so both cache directions move.
        for k in [n / 2, 0, n - 1, n / 3] {
            let cached = state.candidate_fidelities(k);
            let candidates = state.candidates().to_vec();
            for (d, &v) in candidates.iter().enumerate() {
                let mut b = state.binned().clone();
                b.set(k, v);
                let direct = evaluate_fidelity(&p, b.expanded()).unwrap();
                worst = worst.max((direct - cached[d]).abs());
                checked += 1;
            }
            state.update_bin(k);
        }
    }
    Outcome::stated(worst < 1e-12, format!("{checked} candidates, max |ΔF| = {worst:.1e}"))
}

fn stationary_states(_: &Ctx) -> Outcome {
    let grid = SpatialGrid::new(-10.0, 10.0, 256).unwrap();
    let ham = HamiltonianSpec::from_fn(grid, 0.5, 0.0, |x| 0.5 * x * x).unwrap();
    let opts = StationaryOptions::with_tau(1e-3);
    let e0 = ham.energy(&ground_state(&ham, &opts).unwrap()).unwrap();
    let e1 = ham.energy(&excited_state(&ham, 1, &opts).unwrap()).unwrap();
    let mut drift: f64 = 0.0;
    for level in Level::ALL {
        let p = make_problem(level, 1.0).unwrap();
        let mut prop = Propagator::new(&p);
        let mut state = p.psi0.amplitudes().to_vec();
        let mut u = vec![0.0; p.n_params()];
        for j in 0..1000 {
            let s = (j as f64 * 0.01).sin().abs();
            for (k, &(lo, hi)) in p.bounds.iter().enumerate() {
                u[k] = lo + s * (hi - lo);
            }
            prop.step(&p, &u, &mut state);
            let norm = (state.iter().map(|z| z.norm_sqr()).sum::<f64>() * p.grid.dx()).sqrt();
            drift = drift.max((norm - 1.0).abs());
        }
    }
    let pass = (e0 - 0.5).abs() < 1e-6 && (e1 - 1.5).abs() < 1e-6 && drift < 1e-9;
    Outcome::stated(pass, format!("E0 = {e0:.9}, E1 = {e1:.9}, max norm drift {drift:.1e}"))
}

fn sa_cost_accounting(_: &Ctx) -> Outcome {
    let n_d = SaConfig::default().n_d as f64;
    let run = |level: Level, t_ms: f64, n_b: Option<usize>, iterations: usize| {
        let p = make_problem_ms(level, t_ms).unwrap();
        let seed = random_seed(&p, &mut ChaCha8Rng::seed_from_u64(3));
        let config = SaConfig { n_b, max_iterations: Some(iterations), wall_budget: 1e6, ..SaConfig::default() };
        let bins = SaState::new(&p, &seed, &config).unwrap().n_bins() as f64;
        let r = sa::optimize(&p, &seed, &config, &StopSignal::new()).unwrap();
        (p.n_t as f64, bins, r.history)
    };
    let mut pass = true;
    let mut detail = Vec::new();
    let mut bhw_40 = 0.0;
    for n_b in [Some(40), None] {
        let (n_t, bins, history) = run(Level::BringHomeWater, 0.0973, n_b, 3);
        let per_iter = bins * (n_t / 3.0 + n_d);
        for h in history.iter().skip(1) {
            let expect = if h.iteration == 1 { per_iter + 2.0 * n_t / 3.0 } else { per_iter };
            let ratio = h.steps as f64 / expect;
            pass &= (ratio - 1.0).abs() <= 0.2;
            detail.push(format!("n_b={bins} it{} {ratio:.3}", h.iteration));
        }
        pass &= history.len() >= 3;
        if n_b == Some(40) {
            bhw_40 = history[1].steps as f64;
        }
    }
    let (_, _, split) = run(Level::Splitting, Level::Splitting.reference_qsl_ms(), Some(40), 1);
    let factor = split[1].steps as f64 / bhw_40;
    pass &= factor > 10.0;
    Outcome::stated(pass, format!("measured/formula {}; nonlinear factor {factor:.0}x", detail.join(", ")))
}

// ---------------------------------------------------------------- BHW campaign

struct BhwCampaign {
    /// (passed, best F at the slow duration, best F at the fast duration) per attempt.
    qsl_attempts: Vec<(bool, f64, f64)>,
    records: Vec<SolutionRecord>,
    /// Back-swing runs at 0.1045 ms: (n_b label, records).
    binned: Vec<(String, Vec<SolutionRecord>)>,
}

const BHW_FAST: f64 = 0.0973;
const BHW_SLOW: f64 = 0.1057;
const BHW_BINNED_T: f64 = 0.1045;

fn bhw_campaign(ctx: &Ctx) -> &BhwCampaign {
    ctx.bhw.get_or_init(|| {
        let mut records = Vec::new();
        let mut qsl_attempts = Vec::new();
        let (n_grape, n_sa) = ctx.pick((200, 50), (3, 1));
        let budget = ctx.pick(200.0, 20.0);
        for attempt in 0..2u64 {
            let mut fs = [0.0; 2];
            for (i, t) in [BHW_SLOW, BHW_FAST].into_iter().enumerate() {
                let p = make_problem_ms(Level::BringHomeWater, t).unwrap();
                let base = 1_000_000 * (attempt + 1) + 10_000 * i as u64;
                let mut rs = optimize(&p, &binned_seeds(&p, n_grape, None, base), Method::Grape, None, budget, false);
                rs.extend(optimize(&p, &rs_seeds(&p, n_sa, base + 5000), Method::Sa, None, budget, false));
                fs[i] = best(&rs);
                records.extend(rs);
            }
            let pass = fs[0] >= 0.999 && fs[1] >= 0.99;
            qsl_attempts.push((pass, fs[0], fs[1]));
            if pass {
                break;
            }
        }

        // Duration sweep over the clustering and speed-limit windows.
        let (per_t, sweep_budget) = ctx.pick((20, 200.0), (1, 10.0));
        let (lo, hi, n) = (0.079, 0.124, 16);
        for i in 0..n {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let p = make_problem_ms(Level::BringHomeWater, t).unwrap();
            records.extend(optimize(&p, &binned_seeds(&p, per_t, None, 3_000_000 + 1000 * i as u64), Method::Grape, None, sweep_budget, false));
        }

        let p = make_problem_ms(Level::BringHomeWater, BHW_BINNED_T).unwrap();
        let (per_nb, nb_budget) = ctx.pick((300, 200.0), (3, 15.0));
        let mut binned = Vec::new();
        for (i, n_b) in [2, 4, p.n_t].into_iter().enumerate() {
            let label = if n_b == p.n_t { "n_t".to_string() } else { n_b.to_string() };
            let rs = optimize(&p, &binned_seeds(&p, per_nb, Some(n_b), 4_000_000 + 100_000 * i as u64), Method::Grape, None, nb_budget, false);
            records.extend(rs.iter().cloned());
            binned.push((label, rs));
        }
        BhwCampaign { qsl_attempts, records, binned }
    })
}

fn bhw_qsl(ctx: &Ctx) -> Outcome {
    let c = bhw_campaign(ctx);
    let (pass, f_slow, f_fast) = *c.qsl_attempts.last().unwrap();
    ctx.outcome(
        pass,
        format!("attempt {}/2: best F {f_slow:.5} at {BHW_SLOW} ms (need 0.999), {f_fast:.5} at {BHW_FAST} ms (need 0.99)", c.qsl_attempts.len()),
    )
}

fn bhw_two_strategies(ctx: &Ctx) -> Outcome {
    let c = bhw_campaign(ctx);
    let cl = cluster_records(&c.records, &ClusterPreset::bhw_paper()).unwrap();
    let mut slopes = Vec::new();
    for label in 0..cl.n_clusters as i64 {
        let members: Vec<&SolutionRecord> = cl.members(label).into_iter().map(|i| &c.records[i]).collect();
        match exp_gap_fit(&members, BHW_T_REF) {
            Ok(f) => slopes.push(f.b),
            Err(_) => slopes.push(f64::NAN),
        }
    }
    let ratio = if slopes.len() == 2 && slopes.iter().all(|b| *b < 0.0) {
        let (a, b) = (slopes[0].abs(), slopes[1].abs());
        a.max(b) / a.min(b)
    } else {
        f64::NAN
    };
    let pass = cl.n_clusters == 2 && (1.8..=2.8).contains(&ratio);
    ctx.outcome(
        pass,
        format!("{} selected, {} clusters, {} noise, slopes {:?}, ratio {ratio:.2}", cl.indices.len(), cl.n_clusters, cl.n_noise, slopes),
    )
}

fn bhw_binned_effect(ctx: &Ctx) -> Outcome {
    let c = bhw_campaign(ctx);
    let front = best(&c.binned.iter().find(|(l, _)| l == "n_t").unwrap().1);
    let mut found = 0;
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, rs) in &c.binned {
        let back = rs.iter().filter(|r| r.fidelity > front).count();
        let rate = back as f64 / rs.len() as f64;
        if label != "n_t" {
            found += back;
            pass &= rate <= 0.05;
        }
        detail.push(format!("n_b={label}: {back}/{} ({:.1}%)", rs.len(), 100.0 * rate));
    }
    pass &= found > 0;
    ctx.outcome(pass, format!("front-swing best {front:.5}; back-swing {}", detail.join(", ")))
}

fn qsl_procedure(ctx: &Ctx) -> Outcome {
    // Synthetic exponential trade-off crossing F = 0.99 at t_star.
    let t_ref = 1.0;
    let (a, b) = (-1.8, -20.0);
    let t_star = t_ref + ((0.01f64).log10() - a) / b;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let points: Vec<(f64, f64)> = (0..3000)
        .map(|_| {
            let t = rng.random_range(0.8..1.2);
            (t, 1.0 - 10f64.powf(a + b * (t - t_ref)))
        })
        .collect();
    let synth = qsl_sampling(&points, &QslOptions { n_trials: 200, ..QslOptions::new(t_ref, 300) }).unwrap();
    let half = 0.5 * 0.4 * t_ref / 15.0;
    let synth_ok = synth.success_probability == 1.0 && synth.mean_t_fit.is_some_and(|m| (m - t_star).abs() <= half);

    let c = bhw_campaign(ctx);
    let pool: Vec<(f64, f64)> = c.records.iter().map(|r| (r.duration_ms, r.fidelity)).collect();
    let t_qsl = Level::BringHomeWater.reference_qsl_ms();
    let tol = 0.25 * 0.4 * t_qsl / 15.0;
    let means: Vec<Option<f64>> =
        [30, 100, 300].into_iter().map(|n| qsl_sampling(&pool, &QslOptions::new(t_qsl, n)).unwrap().mean_t_fit).collect();
    let real_ok = means.iter().all(Option::is_some) && means.windows(2).all(|w| w[1].unwrap() <= w[0].unwrap() + tol);
    let detail = format!(
        "synthetic P = {}, <T_fit> = {:?} vs {t_star:.4}; BHW pool {} records, <T_fit> for N = 30/100/300: {:?}",
        synth.success_probability,
        synth.mean_t_fit,
        pool.len(),
        means
    );
    Outcome { pass: synth_ok && real_ok, reduced: !ctx.full && synth_ok, detail }
}

// ---------------------------------------------------------------- other levels

fn splitting_landscape(ctx: &Ctx) -> Outcome {
    let t = 1.1 * Level::Splitting.reference_qsl_ms();
    let p = make_problem_ms(Level::Splitting, t).unwrap();
    let (n, budget) = ctx.pick((30, 780.0), (5, 30.0));
    let rs = optimize(&p, &rs_seeds(&p, n, 5_000_000), Method::Grape, None, budget, false);
    let high = rs.iter().filter(|r| r.fidelity >= 0.99).count();
    let share = high as f64 / rs.len() as f64;
    let cl = cluster_records(&rs, &ClusterPreset::splitting_paper()).unwrap();
    let pass = share >= 0.7 && cl.n_clusters == 1;
    ctx.outcome(pass, format!("T = {t:.3} ms: {high}/{} with F >= 0.99, {} clusters, {} noise", rs.len(), cl.n_clusters, cl.n_noise))
}

fn shakeup_modes(ctx: &Ctx) -> Outcome {
    let (n_t_values, per_kind, budget) = ctx.pick((14, 7, 300.0), (7, 1, 15.0));
    let mut solutions = Vec::new();
    for i in 0..n_t_values {
        let t = 0.4 + 0.65 * i as f64 / (n_t_values - 1) as f64;
        let p = make_problem_ms(Level::ShakeUp, t).unwrap();
        let base = 6_000_000 + 1000 * i as u64;
        let mut seeds = rs_seeds(&p, per_kind, base);
        seeds.extend(binned_seeds(&p, per_kind, None, base + 500));
        solutions.extend(optimize(&p, &seeds, Method::Grape, None, budget, true));
    }
    let selected: Vec<(f64, f64, [f64; 6])> = solutions
        .iter()
        .filter(|r| r.fidelity > 0.6)
        .filter_map(|r| Some((r.duration_ms, r.fidelity, cosine_decompose(r.series("u1")?, r.expectation.as_ref()?).ok()?)))
        .collect();
    // A single mode dominates when it carries at least half of the spectral weight.
    let dominated = selected
        .iter()
        .filter(|(_, _, c)| {
            let k = dominant_mode(c);
            2.0 * c[k] * c[k] >= c.iter().map(|v| v * v).sum::<f64>()
        })
        .count();
    let mut by_t: Vec<(f64, f64, usize)> = Vec::new();
    for (t, f, c) in &selected {
        match by_t.iter_mut().find(|e| (e.0 - t).abs() < 1e-9) {
            Some(e) if e.1 >= *f => {}
            Some(e) => *e = (*t, *f, dominant_mode(c)),
            None => by_t.push((*t, *f, dominant_mode(c))),
        }
    }
    by_t.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ks: Vec<usize> = by_t.iter().map(|e| e.2).collect();
    let ascending = ks.len() >= 2 && ks.windows(2).all(|w| w[1] >= w[0]) && ks.first() < ks.last();
    let pass = !selected.is_empty() && dominated == selected.len() && ascending;
    ctx.outcome(
        pass,
        format!("{} of {} solutions with F > 0.6, {dominated} single-mode; dominant k of the best per T: {ks:?}", selected.len(), solutions.len()),
    )
}

fn median_at(runs: &[Vec<IterationRecord>], t: f64) -> f64 {
    fidelity_quantiles(runs, &[t])[0].median
}

fn runtime_ordering(ctx: &Ctx) -> Outcome {
    let n = ctx.pick(20, 1);
    let mut pass = true;
    let mut detail = Vec::new();
    for level in Level::ALL {
        let budget = match level {
            Level::BringHomeWater => ctx.pick(780.0, 70.0),
            _ => ctx.pick(780.0, 20.0),
        };
        let p = make_problem_ms(level, level.reference_qsl_ms()).unwrap();
        let seeds = rs_seeds(&p, n, 7_000_000);
        let runs = |method, n_b| -> Vec<Vec<IterationRecord>> {
            optimize(&p, &seeds, method, n_b, budget, false).into_iter().map(|r| r.telemetry).collect()
        };
        let grape = runs(Method::Grape, None);
        let sa_full = runs(Method::Sa, None);
        let sa_40 = runs(Method::Sa, Some(40));
        let end = |r: &[Vec<IterationRecord>]| median_at(r, budget);
        if level == Level::BringHomeWater {
            let probes: Vec<f64> = (1..=6).map(|i| 10.0 * i as f64).collect();
            let leads = probes.iter().all(|&t| {
                let m = median_at(&sa_40, t);
                m > median_at(&grape, t) && m > median_at(&sa_full, t)
            });
            let plateau = end(&sa_40) < 0.99;
            pass &= leads && plateau;
            detail.push(format!(
                "bhw SA(40) leads 10..60 s: {leads}, medians at 30 s grape {:.3} sa {:.3} sa40 {:.3}, sa40 end {:.4}",
                median_at(&grape, 30.0),
                median_at(&sa_full, 30.0),
                median_at(&sa_40, 30.0),
                end(&sa_40)
            ));
        } else {
            let (g, a, b) = (end(&grape), end(&sa_full), end(&sa_40));
            pass &= g > a && g > b;
            detail.push(format!("{} end medians grape {g:.3} sa {a:.3} sa40 {b:.3}", level.id()));
        }
    }
    ctx.outcome(pass, detail.join("; "))
}

type Criterion = fn(&Ctx) -> Outcome;

fn main() {
    let full = std::env::var("QMOVES_ACCEPTANCE_SCALE").is_ok_and(|v| v == "full");
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, Criterion); 11] = [
        ("gradient-correctness", gradient_correctness),
        ("sa-cache-equivalence", sa_cache_equivalence),
        ("stationary-states", stationary_states),
        ("bhw-qsl-reproduction", bhw_qsl),
        ("bhw-two-strategies", bhw_two_strategies),
        ("bhw-binned-seed-effect", bhw_binned_effect),
        ("splitting-single-strategy", splitting_landscape),
        ("shakeup-mode-structure", shakeup_modes),
        ("qsl-sampling-procedure", qsl_procedure),
        ("sa-cost-accounting", sa_cost_accounting),
        ("runtime-ordering", runtime_ordering),
    ];
    let ctx = Ctx { full, bhw: OnceCell::new() };
    println!("acceptance at {} scale on {} worker(s)", if full { "full" } else { "reduced" }, workers());
    let mut binding_failures = 0;
    let mut lines = Vec::new();
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run(&ctx);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let scale = if o.reduced { " [reduced scale]" } else { "" };
        let line = format!("{verdict} {name}{scale} ({:.0} s): {}", start.elapsed().as_secs_f64(), o.detail);
        println!("{line}");
        lines.push(line);
        if !o.pass && !o.reduced {
            binding_failures += 1;
        }
    }
    println!("---- summary");
    for l in &lines {
        println!("{}", l.split(':').next().unwrap_or(l));
    }
    if binding_failures > 0 {
        println!("{binding_failures} binding criteria failed");
        std::process::exit(1);
    }
}
