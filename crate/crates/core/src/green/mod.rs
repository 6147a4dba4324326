//! Green kernel, cutoff splitting, Birman-Schwinger operator and the rank-one
//! secular equation.

pub mod birman;
pub mod cutoff;
pub mod kernel;
pub mod secular;

pub use birman::{assemble_k, bs_count, hs_continuity, hs_norm, BSOperator, BsCount, HsKernel, Part};
pub use cutoff::{split_r, CutoffSpec};
pub use kernel::{green_antiderivative, green_cell_integrals, green_eval};
pub use secular::{count_bound_scan, secular_solve, ScanReport, ScanRow, SecularSolve};
