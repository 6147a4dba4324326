//! Per-eigenvalue scattering records.

use super::discrete::{discrete_spectrum, DiscreteSpectrum};
use super::eigenfunction::{
    identity_with, integral_residual, normalize_with, residual_grid, tail_limit, Eigenfunction, TailLimit,
    TRANSPORT_REFINEMENT,
};
use super::jost::{phase_constant, PhaseConstant};
use crate::error::Result;
use crate::grid::{FrequencyGrid, PhysicalGrid};
use crate::potentials::PotentialSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringOptions {
    /// Coarse frequency grid; the default rule applies when absent.
    pub grid: Option<FrequencyGrid>,
    /// Window for tails and the phase constant.
    pub window: PhysicalGrid,
    /// Grid for the integral-equation residual.
    pub residual_grid: PhysicalGrid,
    /// Richardson levels for the phase constant.
    pub levels: usize,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        ScatteringOptions { grid: None, window: PhysicalGrid::default(), residual_grid: residual_grid(), levels: 4 }
    }
}

/// A diagnostic value, or the reason it could not be produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Value(T),
    Failed(String),
}

impl<T> Outcome<T> {
    fn from(r: Result<T>) -> Self {
        match r {
            Ok(v) => Outcome::Value(v),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Outcome::Value(v) => Some(v),
            Outcome::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringRecord {
    pub lambda: f64,
    /// Eigenfunction normalised by int u phi = 2 pi i lambda.
    #[serde(skip)]
    pub phi: Option<Eigenfunction>,
    pub normalization: Outcome<()>,
    /// |int u phi - 2 pi i lambda| / (2 pi |lambda|) after normalisation.
    pub normalization_error: f64,
    pub identity_error: f64,
    pub tail: Outcome<TailLimit>,
    pub integral_residual: Outcome<f64>,
    pub phase: Outcome<PhaseConstant>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatteringData {
    pub spectrum: DiscreteSpectrum,
    pub records: Vec<ScatteringRecord>,
}

pub fn scattering(spec: &PotentialSpec, opts: &ScatteringOptions) -> Result<ScatteringData> {
    let spec = spec.load()?;
    let spectrum = discrete_spectrum(&spec, opts.grid)?;
    scattering_for(&spec, spectrum, opts)
}

/// Scattering records for an already computed discrete spectrum.
pub fn scattering_for(spec: &PotentialSpec, spectrum: DiscreteSpectrum, opts: &ScatteringOptions) -> Result<ScatteringData> {
    let mut records = Vec::new();
    let Some(grid) = spectrum.fine_grid else {
        return Ok(ScatteringData { spectrum, records });
    };
    let d = grid.spacing();
    let uhat = if spectrum.eigenvalues.is_empty() { Vec::new() } else { spec.transform_at_progression(0.5 * d, d, grid.n_modes)? };
    for (index, (&lambda, v)) in spectrum.eigenvalues.iter().zip(&spectrum.eigenvectors).enumerate() {
        let raw = Eigenfunction::from_unit_vector(&grid, v);
        let identity_error = identity_with(&raw, &uhat, lambda);
        let record = match normalize_with(&raw, &uhat, lambda) {
            Ok(phi) => {
                let (tail, integral_residual) = match phi.refine(spec, lambda, TRANSPORT_REFINEMENT) {
                    Ok(p) => (
                        Outcome::from(tail_limit(&p, spec, lambda, &opts.window)),
                        Outcome::from(integral_residual(&p, spec, lambda, &opts.residual_grid)),
                    ),
                    Err(e) => (Outcome::Failed(e.to_string()), Outcome::Failed(e.to_string())),
                };
                let target = Complex64::new(0.0, 2.0 * PI * lambda);
                let normalization_error = (phi.integral_against(&uhat) - target).norm() / target.norm();
                ScatteringRecord {
                    lambda,
                    normalization: Outcome::Value(()),
                    normalization_error,
                    identity_error,
                    tail,
                    integral_residual,
                    phase: Outcome::from(phase_constant(spec, &spectrum, index, &phi, opts.levels, &opts.window)),
                    phi: Some(phi),
                }
            }
            Err(e) => ScatteringRecord {
                lambda,
                phi: None,
                normalization: Outcome::Failed(e.to_string()),
                normalization_error: f64::NAN,
                identity_error,
                tail: Outcome::Failed("eigenfunction could not be normalised".into()),
                integral_residual: Outcome::from(integral_residual(&raw, spec, lambda, &opts.residual_grid)),
                phase: Outcome::Failed("eigenfunction could not be normalised".into()),
            },
        };
        records.push(record);
    }
    Ok(ScatteringData { spectrum, records })
}
