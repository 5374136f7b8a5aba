use std::sync::OnceLock;

use num_complex::Complex64;

use super::control::{sample_count, ControlVector};
use super::level::Level;
use super::potentials::{self, shakeup, splitting, tweezer};
use crate::error::{Error, Result};
use crate::units::{SimUnits, RB87_MASS};
use crate::wave::{
    excited_state, ground_state, HamiltonianSpec, SpatialGrid, SplitStepper, StationaryOptions, Wavefunction,
};

/// One fully specified state-transfer problem at a fixed duration.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub level: Level,
    pub grid: SpatialGrid,
    pub dt: f64,
    /// Duration in simulation units, rounded to the δt grid.
    pub duration: f64,
    pub n_t: usize,
    pub g: f64,
    pub units: SimUnits,
    pub psi0: Wavefunction,
    pub psi_tgt: Wavefunction,
    pub param_names: Vec<&'static str>,
    pub bounds: Vec<(f64, f64)>,
    pub endpoints: Vec<(f64, f64)>,
}

struct LevelStates {
    psi0: Wavefunction,
    psi_tgt: Wavefunction,
}

static STATES: [OnceLock<std::result::Result<LevelStates, String>>; 3] =
    [OnceLock::new(), OnceLock::new(), OnceLock::new()];

struct LevelConstants {
    grid: (f64, f64, usize),
    dt: f64,
    g: f64,
    units: SimUnits,
    names: Vec<&'static str>,
    bounds: Vec<(f64, f64)>,
    endpoints: Vec<(f64, f64)>,
}

fn constants(level: Level) -> LevelConstants {
    let chip = || SimUnits::from_length_time(1e-6, 1e-3, RB87_MASS);
    match level {
        Level::BringHomeWater => LevelConstants {
            grid: (-3.0, 3.0, 256),
            dt: 3.5e-4,
            g: 0.0,
            units: SimUnits::from_kappa_length(0.5, 532e-9, RB87_MASS),
            names: vec!["u1", "u2"],
            bounds: vec![tweezer::U1_BOUNDS, tweezer::U2_BOUNDS],
            endpoints: vec![(tweezer::ENDPOINT.0, tweezer::ENDPOINT.0), (tweezer::ENDPOINT.1, tweezer::ENDPOINT.1)],
        },
        Level::ShakeUp => LevelConstants {
            grid: (-2.0, 2.0, 256),
            dt: 1e-3,
            g: shakeup::G,
            units: chip(),
            names: vec!["u1"],
            bounds: vec![shakeup::U1_BOUNDS],
            endpoints: vec![(0.0, 0.0)],
        },
        Level::Splitting => LevelConstants {
            grid: (-3.5, 3.5, 256),
            dt: 1e-3,
            g: splitting::G,
            units: chip(),
            names: vec!["u2"],
            bounds: vec![splitting::U2_BOUNDS],
            endpoints: vec![(0.0, 1.0)],
        },
    }
}

fn index(level: Level) -> usize {
    match level {
        Level::BringHomeWater => 0,
        Level::Splitting => 1,
        Level::ShakeUp => 2,
    }
}

fn solve_states(level: Level, c: &LevelConstants) -> Result<LevelStates> {
    let grid = SpatialGrid::new(c.grid.0, c.grid.1, c.grid.2)?;
    let opts = StationaryOptions::with_tau(c.dt);
    let kappa = c.units.kappa;
    let mut v = vec![0.0; grid.len()];
    match level {
        Level::BringHomeWater => {
            potentials::bhw_static_into(&grid, &mut v);
            let psi0 = ground_state(&HamiltonianSpec::new(grid, kappa, v.clone(), c.g)?, &opts)?;
            potentials::bhw_movable_into(tweezer::ENDPOINT.0, tweezer::ENDPOINT.1, &grid, &mut v);
            let psi_tgt = ground_state(&HamiltonianSpec::new(grid, kappa, v, c.g)?, &opts)?;
            Ok(LevelStates { psi0, psi_tgt })
        }
        Level::Splitting => {
            potentials::splitting_into(0.0, &grid, &mut v);
            let psi0 = ground_state(&HamiltonianSpec::new(grid, kappa, v.clone(), c.g)?, &opts)?;
            potentials::splitting_into(1.0, &grid, &mut v);
            let psi_tgt = ground_state(&HamiltonianSpec::new(grid, kappa, v, c.g)?, &opts)?;
            Ok(LevelStates { psi0, psi_tgt })
        }
        Level::ShakeUp => {
            potentials::shakeup_into(0.0, &grid, &mut v);
            let ham = HamiltonianSpec::new(grid, kappa, v, c.g)?;
            let psi0 = ground_state(&ham, &opts)?;
            let psi_tgt = excited_state(&ham, 1, &opts)?;
            Ok(LevelStates { psi0, psi_tgt })
        }
    }
}

/// Builds a level at duration `duration` (simulation units).
///
/// Initial and target states depend only on the level and are solved once per process.
pub fn make_problem(level: Level, duration: f64) -> Result<ProblemSpec> {
    make_problem_on_grid(level, duration, None)
}

/// Like [`make_problem`] with an optional override of the spatial point count.
///
/// Non-default grids solve their stationary states on every call.
pub fn make_problem_on_grid(level: Level, duration: f64, n_x: Option<usize>) -> Result<ProblemSpec> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidArgument(format!("duration {duration} must be positive")));
    }
    let mut c = constants(level);
    let n_t = sample_count(duration, c.dt);
    if n_t < 3 {
        return Err(Error::InvalidArgument(format!("duration {duration} shorter than two time steps")));
    }
    let fresh;
    let states = match n_x {
        Some(n) if n != c.grid.2 => {
            c.grid.2 = n;
            fresh = solve_states(level, &c)?;
            &fresh
        }
        _ => STATES[index(level)]
            .get_or_init(|| solve_states(level, &c).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| Error::InvalidArgument(format!("stationary states for {level}: {e}")))?,
    };
    Ok(ProblemSpec {
        level,
        grid: *states.psi0.grid(),
        dt: c.dt,
        duration: (n_t - 1) as f64 * c.dt,
        n_t,
        g: c.g,
        units: c.units,
        psi0: states.psi0.clone(),
        psi_tgt: states.psi_tgt.clone(),
        param_names: c.names,
        bounds: c.bounds,
        endpoints: c.endpoints,
    })
}

/// Same as [`make_problem`] with the duration given in milliseconds.
pub fn make_problem_ms(level: Level, duration_ms: f64) -> Result<ProblemSpec> {
    let units = constants(level).units;
    make_problem(level, units.time_from_ms(duration_ms))
}

impl ProblemSpec {
    pub fn n_params(&self) -> usize {
        self.bounds.len()
    }

    pub fn kappa(&self) -> f64 {
        self.units.kappa
    }

    pub fn duration_ms(&self) -> f64 {
        self.units.time_to_ms(self.duration)
    }

    /// Index of the parameter called `name` (`u1` or `u2`).
    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| *n == name)
    }

    /// Potential for the per-parameter control values `u`.
    pub fn potential_into(&self, u: &[f64], out: &mut [f64]) {
        match self.level {
            Level::BringHomeWater => potentials::bhw_into(u[0], u[1], &self.grid, out),
            Level::ShakeUp => potentials::shakeup_into(u[0], &self.grid, out),
            Level::Splitting => potentials::splitting_into(u[0], &self.grid, out),
        }
    }

    /// ∂V/∂u_p at control values `u`.
    pub fn potential_derivative_into(&self, u: &[f64], p: usize, out: &mut [f64]) {
        match (self.level, p) {
            (Level::BringHomeWater, 0) => potentials::bhw_du1_into(u[0], u[1], &self.grid, out),
            (Level::BringHomeWater, _) => potentials::bhw_du2_into(u[0], &self.grid, out),
            (Level::ShakeUp, _) => potentials::shakeup_du1_into(u[0], &self.grid, out),
            (Level::Splitting, _) => potentials::splitting_du2_into(u[0], &self.grid, out),
        }
    }

    pub fn potential(&self, u: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.grid.len()];
        self.potential_into(u, &mut v);
        v
    }

    pub fn hamiltonian(&self, u: &[f64]) -> Result<HamiltonianSpec> {
        HamiltonianSpec::new(self.grid, self.kappa(), self.potential(u), self.g)
    }

    /// Control with every sample equal to `u` (end points are not pinned).
    pub fn constant_control(&self, u: &[f64]) -> Result<ControlVector> {
        ControlVector::from_raw(
            self.dt,
            u.iter().map(|&v| vec![v; self.n_t]).collect(),
            self.bounds.clone(),
            self.endpoints.clone(),
        )
    }

    /// Control sampled from `f(p, t)` with end points pinned to their fixed values.
    pub fn control_from_fn(&self, f: impl Fn(usize, f64) -> f64) -> Result<ControlVector> {
        let values = (0..self.n_params())
            .map(|p| (0..self.n_t).map(|j| f(p, j as f64 * self.dt)).collect())
            .collect();
        let mut c = ControlVector::from_raw(self.dt, values, self.bounds.clone(), self.endpoints.clone())?;
        c.pin_endpoints();
        Ok(c)
    }

    /// Checks length and bounds; end points are checked separately.
    pub fn check_control(&self, control: &ControlVector) -> Result<()> {
        if control.len() != self.n_t {
            return Err(Error::LengthMismatch { expected: self.n_t, got: control.len() });
        }
        if control.n_params() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "{} control parameters for a {}-parameter level",
                control.n_params(),
                self.n_params()
            )));
        }
        if (control.dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::InvalidArgument(format!("control dt {} != level dt {}", control.dt, self.dt)));
        }
        control.check_bounds()
    }

    pub fn real_stepper(&self) -> SplitStepper {
        SplitStepper::real(self.grid, self.kappa(), self.dt)
    }

    pub fn target_amplitudes(&self) -> &[Complex64] {
        self.psi_tgt.amplitudes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shakeup_target_is_odd_with_one_node() {
        let p = make_problem(Level::ShakeUp, 0.5).unwrap();
        assert_eq!(p.psi_tgt.node_count(1e-6), 1);
        let a = p.psi_tgt.amplitudes();
        for i in 0..128 {
            assert!((a[i] + a[255 - i]).norm() < 1e-12);
        }
    }

    #[test]
    fn splitting_target_even_with_two_lobes() {
        let p = make_problem(Level::Splitting, 1.0).unwrap();
        let rho = p.psi_tgt.density();
        for i in 0..128 {
            assert!((rho[i] - rho[255 - i]).abs() < 1e-12);
        }
        let maxima = (1..255).filter(|&i| rho[i] > rho[i - 1] && rho[i] >= rho[i + 1] && rho[i] > 1e-3).count();
        assert_eq!(maxima, 2);
        // initial state is a single lobe
        let rho0 = p.psi0.density();
        let maxima0 = (1..255).filter(|&i| rho0[i] > rho0[i - 1] && rho0[i] >= rho0[i + 1] && rho0[i] > 1e-3).count();
        assert_eq!(maxima0, 1);
    }

    #[test]
    fn bhw_states_sit_in_their_wells() {
        let p = make_problem_ms(Level::BringHomeWater, 0.1).unwrap();
        let rho = p.psi0.density();
        let peak = (0..256).max_by(|&a, &b| rho[a].total_cmp(&rho[b])).unwrap();
        assert!((p.grid.x(peak) - 1.0).abs() < 2.0 * p.grid.dx());
        assert!((p.psi_tgt.mean_position() + 1.0).abs() < 1e-6);
        // cross-talk between the isolated wells is negligible
        let overlap = crate::wave::fidelity(&p.psi0, &p.psi_tgt).unwrap();
        assert!(overlap < 1e-6, "{overlap}");
        for psi in [&p.psi0, &p.psi_tgt] {
            let d = psi.density();
            assert!(d[0] < 1e-8 && d[255] < 1e-8);
        }
    }

    #[test]
    fn duration_rounds_to_time_grid() {
        let p = make_problem_ms(Level::BringHomeWater, 0.1057).unwrap();
        assert_eq!(p.n_t, 781);
        assert!((p.duration - 780.0 * 3.5e-4).abs() < 1e-12);
        assert!(make_problem(Level::ShakeUp, -1.0).is_err());
    }

    #[test]
    fn bhw_endpoint_potential_is_symmetric_double_well() {
        let p = make_problem(Level::BringHomeWater, 0.1).unwrap();
        let v = p.potential(&[-1.0, -130.0]);
        for i in 0..256 {
            assert!((v[i] - v[255 - i]).abs() < 1e-9);
        }
        assert!(v[0].abs() < 1e-3 * 130.0 && v[255].abs() < 1e-3 * 130.0);
    }
}
