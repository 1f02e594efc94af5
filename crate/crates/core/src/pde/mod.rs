//! Finite-difference harness: the dissipativity integral on grids, probe
//! searches for violating test functions, and implicit time stepping.

pub mod discrete;
pub mod evolve;
pub mod probe;
pub mod sparse;

pub use discrete::{
    assemble_operator, dissipativity_integral, form_integral_v, substitute_v, violation, Discretization,
};
pub use evolve::{evolve, evolve_with, Trajectory, TrajectoryRow};
pub use probe::{probe_search, Envelope, Phase, Probe, ProbeFamily, ProbeOutcome, ProbeReport};
pub use sparse::{bicgstab, SolveStats, SolverConfig, SparseMatrix};
