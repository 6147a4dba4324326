//! Negative eigenvalues of L_{c u} along an ascending list of couplings c.

use super::matrix::{assemble, default_grid, delta_edge, eigenvalues};
use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, PhysicalGrid};
use crate::potentials::PotentialSpec;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingBranch {
    pub grid: FrequencyGrid,
    pub couplings: Vec<f64>,
    /// Sorted negative eigenvalues at each coupling.
    pub eigenvalues: Vec<Vec<f64>>,
    /// branches[n][k] = n-th lowest eigenvalue at couplings[k], once it is negative.
    pub branches: Vec<Vec<Option<f64>>>,
    /// Largest mu_n(c_{k+1}) - mu_n(c_k) along each branch (negative when decreasing).
    pub worst_increment: Vec<f64>,
    pub tolerance: f64,
    pub strictly_decreasing: Vec<bool>,
    /// Couplings at which two eigenvalues came within the tolerance of each other.
    pub near_merges: Vec<f64>,
}

/// Grid for sweeps: 1024 modes over the default extent of the base potential.
pub fn sweep_grid(spec: &PotentialSpec) -> Result<FrequencyGrid> {
    FrequencyGrid::new(1024, default_grid(spec)?.xi_max)
}

/// Dense solves of L_{c u} on a common grid. u must be nonnegative; the n-th branch
/// must satisfy mu_n(c_{k+1}) - mu_n(c_k) < -tolerance once it has appeared.
pub fn coupling_sweep(spec: &PotentialSpec, couplings: &[f64], grid: Option<FrequencyGrid>, tolerance: f64) -> Result<CouplingBranch> {
    spec.validate()?;
    let spec = spec.load()?;
    if couplings.windows(2).any(|w| !(w[1] > w[0])) || couplings.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(Error::Parameter("couplings must be positive, finite and strictly ascending".into()));
    }
    let probe = match &spec.family {
        crate::potentials::Family::Tabulated { .. } => spec.sampling_grid()?,
        _ => PhysicalGrid::default(),
    };
    if let Some(v) = spec.sample(&probe)?.iter().find(|&&v| v < 0.0) {
        return Err(Error::Precondition(format!("coupling sweeps need u >= 0 (found {v}); apply positive_part first")));
    }
    let grid = match grid {
        Some(g) => g,
        None => sweep_grid(&spec)?,
    };
    let edge = delta_edge(&grid);
    let mut all = Vec::with_capacity(couplings.len());
    for &c in couplings {
        let m = assemble(&spec.clone().with_coupling(spec.coupling * c), &grid)?;
        all.push(eigenvalues(&m)?.into_iter().filter(|&v| v < -edge).collect::<Vec<f64>>());
    }
    let depth = all.iter().map(|v| v.len()).max().unwrap_or(0);
    let branches: Vec<Vec<Option<f64>>> = (0..depth).map(|n| all.iter().map(|v| v.get(n).copied()).collect()).collect();
    let mut worst_increment = Vec::new();
    let mut strictly_decreasing = Vec::new();
    for b in &branches {
        let present: Vec<(usize, f64)> = b.iter().enumerate().filter_map(|(k, v)| v.map(|x| (k, x))).collect();
        let contiguous = present.windows(2).all(|w| w[1].0 == w[0].0 + 1) && present.last().map(|p| p.0) == Some(b.len() - 1);
        let worst = present.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);
        worst_increment.push(worst);
        strictly_decreasing.push(contiguous && (present.len() < 2 || worst < -tolerance));
    }
    let near_merges = couplings
        .iter()
        .zip(&all)
        .filter(|(_, v)| v.windows(2).any(|w| w[1] - w[0] <= tolerance))
        .map(|(c, _)| *c)
        .collect();
    Ok(CouplingBranch { grid, couplings: couplings.to_vec(), eigenvalues: all, branches, worst_increment, tolerance, strictly_decreasing, near_merges })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_potential_is_rejected() {
        let r = coupling_sweep(&PotentialSpec::gaussian(-1.0, 1.0), &[0.5, 1.0], None, 1e-8);
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn small_grid_branches_decrease() {
        let g = FrequencyGrid::new(128, 16.0).unwrap();
        let b = coupling_sweep(&PotentialSpec::soliton(1.0, 0.0), &[0.5, 1.0, 1.5], Some(g), 1e-8).unwrap();
        assert!(b.strictly_decreasing.iter().all(|&s| s));
        assert!(b.branches[0][0].unwrap() > b.branches[0][1].unwrap());
    }
}
