//! Discrete spectrum by two-resolution agreement.

use super::matrix::{assemble, default_grid, delta_edge, LaxMatrix};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::lanczos::{lanczos, End, LanczosConfig};
use crate::potentials::PotentialSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    pub coarse_grid: Option<FrequencyGrid>,
    pub fine_grid: Option<FrequencyGrid>,
    /// Stable eigenvalues from the fine solve, ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit l2 coefficient vectors on the fine nodes.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
    pub residuals: Vec<f64>,
    /// Matching coarse eigenvalues.
    pub coarse_eigenvalues: Vec<f64>,
    /// Eigenvalues below -delta_edge on one level only, too shallow to be resolved.
    pub dropped: Vec<f64>,
    pub delta_edge: f64,
    /// 1e-3 max(|lambda|, sup |u|) evaluated at the deepest eigenvalue.
    pub tol_stab: f64,
    pub sup_norm: f64,
    /// Lowest eigenvalue seen on either level.
    pub min_eigenvalue: f64,
    /// Smallest spacing between consecutive discrete eigenvalues.
    pub min_gap: Option<f64>,
}

impl DiscreteSpectrum {
    pub fn tol_stab_at(&self, lambda: f64) -> f64 {
        tol_stab(lambda, self.sup_norm)
    }

    /// Semi-boundedness: min eigenvalue >= -sup |u| - slack.
    pub fn lower_bound_holds(&self, slack: f64) -> bool {
        self.min_eigenvalue >= -self.sup_norm - slack
    }

    /// Number of discrete eigenvalues strictly below -e.
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l < -e).count()
    }

    /// Consecutive eigenvalues differ by more than `factor` times their stability tolerance.
    pub fn simple(&self, factor: f64) -> bool {
        self.eigenvalues.windows(2).all(|w| w[1] - w[0] > factor * self.tol_stab_at(w[0]))
    }
}

pub fn tol_stab(lambda: f64, sup_norm: f64) -> f64 {
    1e-3 * lambda.abs().max(sup_norm)
}

struct Level {
    values: Vec<f64>,
    vectors: Vec<Vec<Complex64>>,
    residuals: Vec<f64>,
    extreme: f64,
}

fn negative_part(m: &LaxMatrix) -> Result<Level> {
    let edge = delta_edge(&m.grid);
    let tol = 1e-12 * m.grid.xi_max.max(1.0);
    let out = lanczos(m, &LanczosConfig::new(End::Lowest, -edge, tol))?;
    Ok(Level {
        values: out.pairs.iter().map(|p| p.value).collect(),
        vectors: out.pairs.iter().map(|p| p.vector.clone()).collect(),
        residuals: out.pairs.iter().map(|p| p.residual).collect(),
        extreme: out.extreme,
    })
}

/// Solves at `grid` (default: 2048 modes up to 16 max(scale, sup |u|)) and at
/// its refinement, keeping the eigenvalues below -delta_edge that agree across
/// the two levels within tol_stab.
pub fn discrete_spectrum(spec: &PotentialSpec, grid: Option<FrequencyGrid>) -> Result<DiscreteSpectrum> {
    spec.validate()?;
    let spec = spec.load()?;
    let coarse_grid = match grid {
        Some(g) => g,
        None => default_grid(&spec)?,
    };
    let fine_grid = coarse_grid.refined();
    let sup_norm = spec.sup_norm()?;
    let mut out = DiscreteSpectrum {
        coarse_grid: Some(coarse_grid),
        fine_grid: Some(fine_grid),
        delta_edge: delta_edge(&coarse_grid),
        sup_norm,
        min_eigenvalue: 0.5 * fine_grid.spacing(),
        tol_stab: tol_stab(0.0, sup_norm),
        ..Default::default()
    };
    if sup_norm == 0.0 {
        return Ok(out);
    }
    let coarse = negative_part(&assemble(&spec, &coarse_grid)?)?;
    let fine = negative_part(&assemble(&spec, &fine_grid)?)?;
    out.min_eigenvalue = coarse.extreme.min(fine.extreme);

    let mut used = vec![false; fine.values.len()];
    let mut unmatched = Vec::new();
    for &c in &coarse.values {
        let tol = tol_stab(c, sup_norm);
        let best = (0..fine.values.len())
            .filter(|&k| !used[k])
            .min_by(|&a, &b| (fine.values[a] - c).abs().total_cmp(&(fine.values[b] - c).abs()));
        match best {
            Some(k) if (fine.values[k] - c).abs() <= tol => {
                used[k] = true;
                out.coarse_eigenvalues.push(c);
                out.eigenvalues.push(fine.values[k]);
                out.eigenvectors.push(fine.vectors[k].clone());
                out.residuals.push(fine.residuals[k]);
            }
            _ => unmatched.push(c),
        }
    }
    unmatched.extend(fine.values.iter().zip(&used).filter(|(_, &u)| !u).map(|(v, _)| *v));
    // Near the edge an eigenvalue may sit below -delta_edge on one level only;
    // deeper disagreement means the grid does not resolve the spectrum.
    let shallow = (10.0 * out.delta_edge).max(tol_stab(0.0, sup_norm));
    for v in unmatched {
        if v < -shallow {
            return Err(Error::Resolution(format!(
                "eigenvalue {v:.6} is not reproduced across resolutions (coarse {:?}, fine {:?}); increase xi_max or n_modes",
                coarse.values, fine.values
            )));
        }
        out.dropped.push(v);
    }
    if let Some(&deepest) = out.eigenvalues.first() {
        out.tol_stab = tol_stab(deepest, sup_norm);
    }
    out.min_gap = out.eigenvalues.windows(2).map(|w| w[1] - w[0]).min_by(|a, b| a.total_cmp(b));
    if let Some(&low) = out.eigenvalues.first() {
        if low < -sup_norm - out.tol_stab {
            return Err(Error::Bound(format!("eigenvalue {low} lies below -sup|u| = {}", -sup_norm)));
        }
    }
    Ok(out)
}
