//! Eigenfunctions as samples of phi^ on the frequency nodes, and the
//! diagnostics that relate them to the potential.

use crate::error::{Error, Result};
use crate::fourier::half_line_to_physical;
use crate::green::green_cell_integrals;
use crate::grid::{FrequencyGrid, PhysicalGrid};
use crate::potentials::PotentialSpec;
use crate::toeplitz::HermitianToeplitz;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// phi^(xi_j) on the midpoint nodes; phi^ vanishes for xi < 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenfunction {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

impl Eigenfunction {
    /// The function with ||phi||_2 = 1 whose node samples are proportional to `v`.
    pub fn from_unit_vector(grid: &FrequencyGrid, v: &[Complex64]) -> Self {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let s = (2.0 * PI / grid.spacing()).sqrt() / norm;
        Eigenfunction { grid: *grid, values: v.iter().map(|c| c * s).collect() }
    }

    /// ||phi||_2^2 = (1/2pi) int |phi^|^2.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spacing() / (2.0 * PI)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Eigenfunction { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn to_physical(&self, xs: &[f64]) -> Vec<Complex64> {
        half_line_to_physical(&self.grid, &self.values, xs)
    }

    /// int u phi dx = (1/2pi) int conj(u^) phi^ dxi, given u^ on the same nodes.
    pub fn integral_against(&self, uhat: &[Complex64]) -> Complex64 {
        let s: Complex64 = uhat.iter().zip(&self.values).map(|(a, b)| a.conj() * b).sum();
        s * (self.grid.spacing() / (2.0 * PI))
    }
}

/// Nystrom interpolant on a grid with `r` (odd) times as many nodes over the same extent:
/// f(xi) = [extra(xi) + (dxi/2pi) sum_k u^(xi - xi_k) f_k] / (xi - shift).
/// For an eigenvector with shift = lambda and no extra term this is the eigenfunction
/// formula phi^ = (u phi)^ / (xi - lambda) evaluated between the nodes.
pub fn nystrom_refine(
    spec: &PotentialSpec,
    grid: &FrequencyGrid,
    values: &[Complex64],
    shift: f64,
    extra: Option<&[Complex64]>,
    r: usize,
) -> Result<(FrequencyGrid, Vec<Complex64>)> {
    if r.is_multiple_of(2) {
        return Err(Error::Parameter(format!("refinement factor {r} must be odd")));
    }
    let n = grid.n_modes;
    let fine = FrequencyGrid::new(r * n, grid.xi_max)?;
    let delta = fine.spacing();
    let rn = r * n;
    let o = (r - 1) / 2;
    // xi'_i - xi_k = (i - o - r k) delta, so the sum is a linear convolution of the
    // transform sampled at multiples of delta with the zero-stuffed values.
    let s = rn - 1 + o;
    let t = spec.transform_at_progression(-(s as f64) * delta, delta, s + rn)?;
    let len = (s + rn) + rn - 1;
    let p = len.next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); p];
    a[..t.len()].copy_from_slice(&t);
    let mut b = vec![Complex64::new(0.0, 0.0); p];
    for (k, v) in values.iter().enumerate() {
        b[r * k] = *v;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(p);
    fwd.process(&mut a);
    fwd.process(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    planner.plan_fft_inverse(p).process(&mut a);
    let w = grid.spacing() / (2.0 * PI) / p as f64;
    let out = (0..rn)
        .map(|i| {
            let mut v = a[i + rn - 1] * w;
            if let Some(e) = extra {
                v += e[i];
            }
            v / (fine.node(i) - shift)
        })
        .collect();
    Ok((fine, out))
}

impl Eigenfunction {
    /// The Nystrom interpolant of an eigenfunction on an r-times finer grid.
    pub fn refine(&self, spec: &PotentialSpec, lambda: f64, r: usize) -> Result<Eigenfunction> {
        let (grid, values) = nystrom_refine(spec, &self.grid, &self.values, lambda, None, r)?;
        Ok(Eigenfunction { grid, values })
    }
}

/// Refinement used before transporting eigenfunctions to physical space.
pub const TRANSPORT_REFINEMENT: usize = 5;

fn transform_at_nodes(spec: &PotentialSpec, grid: &FrequencyGrid) -> Result<Vec<Complex64>> {
    let d = grid.spacing();
    spec.transform_at_progression(0.5 * d, d, grid.n_modes)
}

/// |int u phi| must reach this fraction of its exact value sqrt(2pi|lambda|) ||phi||.
pub const NORMALIZATION_GUARD: f64 = 1e-2;

/// Rescales phi so that int u phi dx = 2 pi i lambda.
pub fn normalize_eigenfunction(phi: &Eigenfunction, spec: &PotentialSpec, lambda: f64) -> Result<Eigenfunction> {
    let uhat = transform_at_nodes(spec, &phi.grid)?;
    normalize_with(phi, &uhat, lambda)
}

pub(crate) fn normalize_with(phi: &Eigenfunction, uhat: &[Complex64], lambda: f64) -> Result<Eigenfunction> {
    let integral = phi.integral_against(uhat);
    let floor = (2.0 * PI * lambda.abs() * phi.norm_sq()).sqrt() * (1.0 - NORMALIZATION_GUARD);
    if !(integral.norm() >= floor) || floor == 0.0 {
        return Err(Error::Resolution(format!(
            "|int u phi| = {:.6e} is below sqrt(2 pi |lambda|) ||phi|| (1 - {NORMALIZATION_GUARD}) = {floor:.6e}; \
             the discretisation violates the eigenfunction identity",
            integral.norm()
        )));
    }
    Ok(phi.scaled(Complex64::new(0.0, 2.0 * PI * lambda) / integral))
}

/// | |int u phi|^2 - 2 pi |lambda| ||phi||^2 | / (2 pi |lambda| ||phi||^2).
pub fn identity_check(phi: &Eigenfunction, spec: &PotentialSpec, lambda: f64) -> Result<f64> {
    let uhat = transform_at_nodes(spec, &phi.grid)?;
    Ok(identity_with(phi, &uhat, lambda))
}

pub(crate) fn identity_with(phi: &Eigenfunction, uhat: &[Complex64], lambda: f64) -> f64 {
    let rhs = 2.0 * PI * lambda.abs() * phi.norm_sq();
    (phi.integral_against(uhat).norm_sqr() - rhs).abs() / rhs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailLimit {
    /// Median of x phi(x) over the outer tenth of the window on each side.
    pub left: Complex64,
    pub right: Complex64,
    /// (1 / 2 pi i lambda) int u phi dx.
    pub reference: Complex64,
    /// max over both sides of |limit - reference|.
    pub error: f64,
    /// Largest relative deviation of x phi from its median on either side.
    pub spread: f64,
    /// Constant term of the least-squares fit x phi = a + b/x + c/x^2 over both
    /// outer strips, free of the O(1/x) bias of the medians.
    pub extrapolated: Complex64,
    /// |extrapolated - reference|.
    pub extrapolated_error: f64,
}

/// Constant term of the least-squares fit v = a + b/x + c/x^2.
fn inverse_power_fit(xs: &[f64], vals: &[Complex64]) -> Complex64 {
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [Complex64::new(0.0, 0.0); 3];
    for (x, v) in xs.iter().zip(vals).filter(|(x, _)| **x != 0.0) {
        let row = [1.0, 1.0 / x, 1.0 / (x * x)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += v * row[i];
        }
    }
    // Cramer's rule on the 3x3 normal equations.
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&ata);
    let part = |b: [f64; 3]| {
        let mut m = ata;
        for i in 0..3 {
            m[i][0] = b[i];
        }
        det(&m) / d
    };
    Complex64::new(part(atb.map(|z| z.re)), part(atb.map(|z| z.im)))
}

fn complex_median(v: &[Complex64]) -> Complex64 {
    let med = |mut a: Vec<f64>| {
        a.sort_by(|x, y| x.total_cmp(y));
        let n = a.len();
        if n % 2 == 1 {
            a[n / 2]
        } else {
            0.5 * (a[n / 2 - 1] + a[n / 2])
        }
    };
    Complex64::new(med(v.iter().map(|c| c.re).collect()), med(v.iter().map(|c| c.im).collect()))
}

/// Relative plateau spread above which the window is declared too small.
pub const TAIL_SPREAD_LIMIT: f64 = 0.05;

pub fn tail_limit(phi: &Eigenfunction, spec: &PotentialSpec, lambda: f64, window: &PhysicalGrid) -> Result<TailLimit> {
    window.validate()?;
    let uhat = transform_at_nodes(spec, &phi.grid)?;
    let reference = phi.integral_against(&uhat) / Complex64::new(0.0, 2.0 * PI * lambda);
    let n = window.n_points;
    let k = (n / 10).max(1);
    let idx: Vec<usize> = (0..k).chain(n - k..n).collect();
    let xs: Vec<f64> = idx.iter().map(|&i| window.point(i)).collect();
    let vals: Vec<Complex64> = phi.to_physical(&xs).iter().zip(&xs).map(|(p, x)| p * x).collect();
    let side = |v: &[Complex64]| {
        let m = complex_median(v);
        let spread = v.iter().map(|v| (v - m).norm()).fold(0.0, f64::max) / m.norm().max(1e-300);
        (m, spread)
    };
    let (left, sl) = side(&vals[..k]);
    let (right, sr) = side(&vals[k..]);
    let spread = sl.max(sr);
    if spread > TAIL_SPREAD_LIMIT {
        return Err(Error::Window(format!(
            "x phi(x) has not settled in the outer tenth of [{}, {}]: relative spread {spread:.3e}",
            window.x_min, window.x_max
        )));
    }
    let error = (left - reference).norm().max((right - reference).norm());
    let extrapolated = inverse_power_fit(&xs, &vals);
    let extrapolated_error = (extrapolated - reference).norm();
    Ok(TailLimit { left, right, reference, error, spread, extrapolated, extrapolated_error })
}

/// Physical grid used for the integral-equation residual: fine enough that
/// cell-wise product integration resolves u phi.
pub fn residual_grid() -> PhysicalGrid {
    PhysicalGrid { n_points: 16384, x_min: -200.0, x_max: 200.0 }
}

/// ||phi - G_lambda * (u phi)||_2 / ||phi||_2 on `grid`, the convolution taken by
/// exact cell integrals of G against cell values of u phi.
pub fn integral_residual(phi: &Eigenfunction, spec: &PotentialSpec, lambda: f64, grid: &PhysicalGrid) -> Result<f64> {
    grid.validate()?;
    if !(lambda < 0.0) {
        return Err(Error::Parameter(format!("integral equation needs lambda < 0, got {lambda}")));
    }
    let xs = grid.points();
    let f = phi.to_physical(&xs);
    let norm = f.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let u = spec.sample(grid)?;
    let uf: Vec<Complex64> = f.iter().zip(&u).map(|(a, b)| a * b).collect();
    let kernel = HermitianToeplitz::new(green_cell_integrals(-lambda, grid.spacing(), grid.n_points)?);
    let mut g = vec![Complex64::new(0.0, 0.0); grid.n_points];
    kernel.apply(&uf, &mut g);
    let diff = f.iter().zip(&g).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    Ok(diff / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// phi(x) = 1/(x - x0 + i/nu) has phi^(xi) = -2 pi i e^{-xi/nu} e^{-i xi x0} on xi > 0.
    fn soliton_eigenfunction(nu: f64, x0: f64, grid: &FrequencyGrid) -> Eigenfunction {
        let values = grid
            .nodes()
            .iter()
            .map(|&xi| Complex64::new(0.0, -2.0 * PI) * Complex64::from_polar((-xi / nu).exp(), -xi * x0))
            .collect();
        Eigenfunction { grid: *grid, values }
    }

    #[test]
    fn exact_soliton_pair_satisfies_identities() {
        // int u phi = -i pi nu and 2 pi i lambda = -i pi nu for lambda = -nu/2.
        let g = FrequencyGrid::new(4096, 40.0).unwrap();
        for (nu, x0) in [(1.0, 0.0), (2.0, 5.0)] {
            let spec = PotentialSpec::soliton(nu, x0);
            let phi = soliton_eigenfunction(nu, x0, &g);
            let lam = -0.5 * nu;
            // The midpoint rule on the e^{-2 xi/nu} integrand errs by h^2/(6 nu^2) relative.
            let midpoint = g.spacing().powi(2) / (6.0 * nu * nu);
            let ic = identity_check(&phi, &spec, lam).unwrap();
            assert!(ic < 1.1 * midpoint, "{nu} {ic} {midpoint}");
            let n = normalize_eigenfunction(&phi, &spec, lam).unwrap();
            let c: Complex64 = n.values[7] / phi.values[7];
            assert!((c - 1.0).norm() < 1.1 * midpoint, "{c}");
        }
    }

    #[test]
    fn renormalising_is_idempotent() {
        let g = FrequencyGrid::new(2048, 32.0).unwrap();
        let spec = PotentialSpec::soliton(1.0, 0.0);
        let phi = soliton_eigenfunction(1.0, 0.0, &g).scaled(Complex64::new(0.3, -2.0));
        let a = normalize_eigenfunction(&phi, &spec, -0.5).unwrap();
        let b = normalize_eigenfunction(&a, &spec, -0.5).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn identity_error_is_scale_invariant() {
        let g = FrequencyGrid::new(1024, 20.0).unwrap();
        let spec = PotentialSpec::soliton(1.0, 0.0);
        let phi = soliton_eigenfunction(1.0, 0.0, &g);
        let a = identity_check(&phi, &spec, -0.5).unwrap();
        let b = identity_check(&phi.scaled(Complex64::new(-4.0, 1.5)), &spec, -0.5).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn unit_vector_has_unit_norm() {
        let g = FrequencyGrid::new(64, 4.0).unwrap();
        let v: Vec<Complex64> = (0..64).map(|j| Complex64::new(1.0 / (1.0 + j as f64), 0.2)).collect();
        assert!((Eigenfunction::from_unit_vector(&g, &v).norm_sq() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wrong_eigenvalue_trips_the_guard() {
        let g = FrequencyGrid::new(1024, 20.0).unwrap();
        let phi = soliton_eigenfunction(1.0, 0.0, &g);
        assert!(matches!(
            normalize_eigenfunction(&phi, &PotentialSpec::soliton(1.0, 0.0), -2.0),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn tail_of_exact_soliton_eigenfunction() {
        let g = FrequencyGrid::new(8192, 64.0).unwrap();
        let spec = PotentialSpec::soliton(1.0, 0.0);
        let phi = soliton_eigenfunction(1.0, 0.0, &g);
        let t = tail_limit(&phi, &spec, -0.5, &PhysicalGrid::default()).unwrap();
        let midpoint = g.spacing().powi(2) / 6.0;
        assert!((t.reference - 1.0).norm() < 1.1 * midpoint, "{t:?}");
        assert!(t.error < 1e-2, "{t:?}");
    }

    #[test]
    fn residual_of_exact_soliton_pair() {
        let g = FrequencyGrid::new(8192, 64.0).unwrap();
        let spec = PotentialSpec::soliton(1.0, 0.0);
        let phi = soliton_eigenfunction(1.0, 0.0, &g);
        let r = integral_residual(&phi, &spec, -0.5, &residual_grid()).unwrap();
        assert!(r < 1e-3, "{r}");
        let wrong = integral_residual(&phi, &spec, -0.8, &residual_grid()).unwrap();
        assert!(wrong > 1e-2, "{wrong}");
    }

    #[test]
    fn nystrom_refinement_reproduces_exact_eigenfunction() {
        // The exact soliton eigenfunction solves the continuum equation, so its Nystrom
        // interpolant must match the closed form between the nodes.
        let g = FrequencyGrid::new(1024, 24.0).unwrap();
        let spec = PotentialSpec::soliton(1.0, 2.0);
        let phi = soliton_eigenfunction(1.0, 2.0, &g);
        let fine = phi.refine(&spec, -0.5, 3).unwrap();
        let exact = soliton_eigenfunction(1.0, 2.0, &fine.grid);
        let worst = fine.values.iter().zip(&exact.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(worst < 1e-3 * 2.0 * PI, "{worst}");
        assert!(matches!(phi.refine(&spec, -0.5, 2), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_field_residual_is_zero() {
        let g = FrequencyGrid::new(16, 4.0).unwrap();
        let phi = Eigenfunction { grid: g, values: vec![Complex64::new(0.0, 0.0); 16] };
        let pg = PhysicalGrid::symmetric(64, 10.0).unwrap();
        assert_eq!(integral_residual(&phi, &PotentialSpec::zero(), -1.0, &pg).unwrap(), 0.0);
    }
}
