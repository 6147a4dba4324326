//! Direct scattering for the Benjamin-Ono Lax operator: discrete spectra,
//! eigenfunctions and phase constants, Birman-Schwinger counting, and the
//! integrating-factor flow used to check isospectrality.

pub mod error;
pub mod evolve;
pub mod fourier;
pub mod green;
pub mod grid;
pub mod lanczos;
pub mod lax;
pub mod potentials;
pub mod quadrature;
pub mod special;
pub mod toeplitz;
pub mod verify;

pub use error::{Error, Result};
