//! Discrete absolutely minimizing Lipschitz extensions on metric networks.

pub mod experiments;
pub mod grid;
pub mod io;
pub mod modulus;
pub mod netfile;
pub mod network;
pub mod solver;

pub use grid::{build_grid, build_slot_domain, Grid, GridSpec};
pub use modulus::{concave_modulus, lipschitz_constant, ModulusFn};
pub use network::{hausdorff_distance, validate_p4, DistanceMatrix, Network, NodeId, Norm, P4Metric, Point};
pub use solver::{
    mcshane_init, mu, residual, solve, solve_from, DirichletProblem, ModulusChoice, ScalarField, SolveOptions,
    SolveReport,
};
