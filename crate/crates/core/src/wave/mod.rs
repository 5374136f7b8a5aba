//! Spatial grids, wavefunctions and split-step dynamics.

mod function;
mod grid;
mod hamiltonian;
mod split_step;
mod stationary;

pub use function::{fidelity, inner_product, Wavefunction};
pub(crate) use function::raw_inner;
pub use grid::SpatialGrid;
pub use hamiltonian::HamiltonianSpec;
pub use split_step::{evolve_static, kinetic_expectation, step_split_fourier, Clock, SplitStepper};
pub use stationary::{excited_state, ground_state, StationaryOptions};
