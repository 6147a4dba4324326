//! Discretised Lax operator, its discrete spectrum and the scattering diagnostics.

pub mod discrete;
pub mod eigenfunction;
pub mod jost;
pub mod matrix;
pub mod scattering;
pub mod sweep;

pub use discrete::{discrete_spectrum, tol_stab, DiscreteSpectrum};
pub use eigenfunction::{
    identity_check, integral_residual, normalize_eigenfunction, residual_grid, tail_limit, Eigenfunction, TailLimit,
};
pub use jost::{jost_on, jost_solution, phase_constant, JostSolution, PhaseConstant, SOLVER_GAP};
pub use matrix::{assemble, default_grid, delta_edge, eigensolve, eigenvalues, LaxMatrix, SpectralResult};
pub use scattering::{scattering, scattering_for, Outcome, ScatteringData, ScatteringOptions, ScatteringRecord};
pub use sweep::{coupling_sweep, sweep_grid, CouplingBranch};
