//! Level definitions: potentials, bounds, fixed end points, units and time grids.

mod control;
mod level;
pub mod potentials;
mod problem;
mod propagate;

pub use control::{denormalize, normalize, sample_count, ControlVector};
pub use level::Level;
pub use potentials::{bhw_potential, shakeup_potential, splitting_potential};
pub use problem::{make_problem, make_problem_ms, make_problem_on_grid, ProblemSpec};
pub use propagate::{evaluate_fidelity, propagate, Propagation, Propagator};
pub(crate) use propagate::overlap_fidelity;
