//! Discretised Lax operator on the Fourier half-line:
//! M[j, k] = xi_j delta_jk - (dxi/2pi) u^(xi_j - xi_k) on midpoint nodes.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::lanczos::HermitianOperator;
use crate::potentials::PotentialSpec;
use crate::toeplitz::HermitianToeplitz;
use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Assembly fails when |M - M^H| exceeds this.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub struct LaxMatrix {
    pub grid: FrequencyGrid,
    pub spec: PotentialSpec,
    /// Largest |M[j, k] - conj(M[k, j])| implied by the sampled transform.
    pub hermitian_defect: f64,
    offdiag: HermitianToeplitz,
}

/// Default resolution: 2048 modes up to 16 max(decay rate of u^, sup |u|).
pub fn default_grid(spec: &PotentialSpec) -> Result<FrequencyGrid> {
    let scale = spec.frequency_scale()?.max(spec.sup_norm()?);
    FrequencyGrid::new(2048, 16.0 * scale.max(1e-3))
}

pub fn assemble(spec: &PotentialSpec, grid: &FrequencyGrid) -> Result<LaxMatrix> {
    spec.validate()?;
    let spec = spec.load()?;
    let n = grid.n_modes;
    let d = grid.spacing();
    let w = d / (2.0 * PI);
    let plus = spec.transform_at_multiples(d, n)?;
    let minus = spec.transform_at_multiples(-d, n)?;
    let peak = plus.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let hermitian_defect = plus.iter().zip(&minus).map(|(p, m)| (p.conj() - m).norm() * w).fold(0.0, f64::max);
    if hermitian_defect > HERMITIAN_TOL * (1.0 + peak * w) {
        return Err(Error::Assembly(format!(
            "transform of u is not conjugate symmetric: Hermitian defect {hermitian_defect:.3e}"
        )));
    }
    let column = plus.iter().map(|v| -v * w).collect();
    Ok(LaxMatrix { grid: *grid, spec, hermitian_defect, offdiag: HermitianToeplitz::new(column) })
}

impl LaxMatrix {
    pub fn dim(&self) -> usize {
        self.grid.n_modes
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        let diag = if j == k { self.grid.node(j) } else { 0.0 };
        self.offdiag.entry(j, k) + diag
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        Mat::from_fn(self.dim(), self.dim(), |j, k| self.entry(j, k))
    }

    /// y = M x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.offdiag.apply(x, y);
        for (j, (o, v)) in y.iter_mut().zip(x).enumerate() {
            *o += v * self.grid.node(j);
        }
    }

    /// Samples of u^ at the nodes themselves, used for int u phi = (1/2pi) int conj(u^) phi^.
    pub fn transform_at_nodes(&self) -> Result<Vec<Complex64>> {
        let d = self.grid.spacing();
        self.spec.transform_at_progression(0.5 * d, d, self.dim())
    }
}

impl HermitianOperator for LaxMatrix {
    fn dim(&self) -> usize {
        self.grid.n_modes
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        LaxMatrix::apply(self, x, y)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SpectralResult {
    pub grid: Option<FrequencyGrid>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit l2 coefficient vectors on the nodes, aligned with `eigenvalues`.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// ||M v - lambda v||_2 per pair.
    pub residuals: Vec<f64>,
    /// Indices into `eigenvalues` classified as discrete spectrum.
    pub discrete_indices: Vec<usize>,
    /// max |eigenvalue|.
    pub operator_norm: f64,
}

impl SpectralResult {
    pub fn discrete(&self) -> Vec<f64> {
        self.discrete_indices.iter().map(|&i| self.eigenvalues[i]).collect()
    }
}

/// Full dense eigendecomposition with residuals; eigenvalues below -delta_edge
/// are marked discrete without any resolution check.
pub fn eigensolve(m: &LaxMatrix) -> Result<SpectralResult> {
    let a = m.to_dense();
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("dense Hermitian eigensolver failed on {} modes: {e:?}", m.dim())))?;
    let n = m.dim();
    let s = eig.S().column_vector();
    let u = eig.U();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let eigenvectors: Vec<Vec<Complex64>> = (0..n).map(|k| (0..n).map(|j| u[(j, k)]).collect()).collect();
    let mut residuals = Vec::with_capacity(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (lam, v) in eigenvalues.iter().zip(&eigenvectors) {
        m.apply(v, &mut buf);
        residuals.push(buf.iter().zip(v).map(|(a, b)| (a - b * lam).norm_sqr()).sum::<f64>().sqrt());
    }
    let operator_norm = eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let edge = delta_edge(&m.grid);
    let discrete_indices = (0..n).filter(|&i| eigenvalues[i] < -edge).collect();
    Ok(SpectralResult { grid: Some(m.grid), eigenvalues, eigenvectors, residuals, discrete_indices, operator_norm })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(m: &LaxMatrix) -> Result<Vec<f64>> {
    m.to_dense()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numeric(format!("dense Hermitian eigensolver failed on {} modes: {e:?}", m.dim())))
}

/// Distance below zero an eigenvalue must reach to count as discrete.
pub fn delta_edge(grid: &FrequencyGrid) -> f64 {
    (0.05 * grid.spacing()).max(1e-6)
}
