//! Simulation, optimization and analysis of 1D quantum state transfers.

pub mod analysis;
pub mod error;
pub mod grape;
pub mod optim;
pub mod problems;
pub mod sa;
pub mod seeding;
pub mod service;
pub mod store;
pub mod units;
pub mod wave;

pub use error::{Error, Result};
