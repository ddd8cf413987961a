//! Vanishing-viscosity solver for diagonal hyperbolic systems with monotone
//! data, with runtime checks of the a-priori estimates such solutions obey.

pub mod checks;
pub mod config;
pub mod convergence;
pub mod dislocation;
pub mod error;
pub mod estimates;
pub mod grid;
pub mod ic;
pub mod matrix;
pub mod oracles;
pub mod solver;
pub mod systems;

pub use error::{Error, Result};
pub use grid::{forward_gradient, quad_trapezoid, FieldSet, GradientSet, Grid1D, Topology};
pub use ic::MonotoneProfile;
pub use matrix::Matrix;
pub use solver::{run, RunConfig, RunOutput, SolverState};
pub use systems::{BoxU, SystemSpec};
