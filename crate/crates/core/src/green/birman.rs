//! Discretised Birman-Schwinger operator K_{-E} = sqrt(u) G_{-E} * (sqrt(u) .) and its
//! splitting into the Hilbert-Schmidt part M_{-E} and the rank-one part L_{-E}.

use super::cutoff::{split_r, CutoffSpec};
use super::kernel::{green_cell_integrals, green_eval, n0_cell_integrals};
use crate::quadrature::integrate_real;
use crate::error::{Error, Result};
use crate::grid::PhysicalGrid;
use crate::lanczos::{lanczos, End, HermitianOperator, LanczosConfig};
use crate::toeplitz::HermitianToeplitz;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// K[i, j] = sqrt(u_i) c_{i-j} sqrt(u_j) with c_m the exact cell integrals of G_{-E};
/// L[i, j] = (R(E)/2pi) h sqrt(u_i u_j); M = K - L.
pub struct BSOperator {
    pub e: f64,
    pub grid: PhysicalGrid,
    pub u: Vec<f64>,
    pub sqrt_u: Vec<f64>,
    pub cutoff: CutoffSpec,
    pub r_e: f64,
    /// (R(E)/2pi) h, the constant removed from every kernel entry to form M.
    pub rank_one: f64,
    kernel: HermitianToeplitz,
    remainder: HermitianToeplitz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    K,
    M,
}

pub fn validate_nonnegative(u: &[f64]) -> Result<()> {
    match u.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
        Some(i) => Err(Error::Precondition(format!("u[{i}] = {} is negative; apply positive_part first", u[i]))),
        None => Ok(()),
    }
}

pub fn assemble_k(u: &[f64], grid: &PhysicalGrid, e: f64, cutoff: &CutoffSpec) -> Result<BSOperator> {
    grid.validate()?;
    if u.len() != grid.n_points {
        return Err(Error::Grid(format!("{} samples on a {}-point grid", u.len(), grid.n_points)));
    }
    validate_nonnegative(u)?;
    let h = grid.spacing();
    let n = grid.n_points;
    let cells = green_cell_integrals(e, h, n)?;
    let r_e = split_r(e, cutoff);
    let rank_one = r_e * h / (2.0 * PI);
    let rem: Vec<Complex64> = cells.iter().map(|c| c - rank_one).collect();
    Ok(BSOperator {
        e,
        grid: *grid,
        u: u.to_vec(),
        sqrt_u: u.iter().map(|v| v.sqrt()).collect(),
        cutoff: *cutoff,
        r_e,
        rank_one,
        kernel: HermitianToeplitz::new(cells),
        remainder: HermitianToeplitz::new(rem),
    })
}

impl BSOperator {
    pub fn dim(&self) -> usize {
        self.grid.n_points
    }

    fn toeplitz(&self, part: Part) -> &HermitianToeplitz {
        match part {
            Part::K => &self.kernel,
            Part::M => &self.remainder,
        }
    }

    pub fn entry(&self, part: Part, i: usize, j: usize) -> Complex64 {
        self.toeplitz(part).entry(i, j) * (self.sqrt_u[i] * self.sqrt_u[j])
    }

    /// The vector s = sqrt(u h), for which L = (R/2pi) s s^T and (s, s) = sum u h.
    pub fn s(&self) -> Vec<Complex64> {
        let h = self.grid.spacing();
        self.u.iter().map(|v| Complex64::new((v * h).sqrt(), 0.0)).collect()
    }

    pub fn apply(&self, part: Part, x: &[Complex64], y: &mut [Complex64]) {
        let t: Vec<Complex64> = x.iter().zip(&self.sqrt_u).map(|(a, s)| a * s).collect();
        self.toeplitz(part).apply(&t, y);
        y.iter_mut().zip(&self.sqrt_u).for_each(|(a, s)| *a *= s);
    }

    pub fn view(&self, part: Part) -> BsView<'_> {
        BsView { op: self, part }
    }

    /// Max |A - A^H| over the dense matrix (small grids only).
    pub fn hermitian_defect(&self, part: Part) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.entry(part, i, j) - self.entry(part, j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of K (descending) above `threshold`.
    pub fn top_eigenvalues(&self, threshold: f64) -> Result<Vec<f64>> {
        let cfg = LanczosConfig::new(End::Highest, threshold, 1e-10);
        Ok(lanczos(&self.view(Part::K), &cfg)?.pairs.iter().map(|p| p.value).collect())
    }

    /// max |eigenvalue| of the chosen part.
    pub fn operator_norm(&self, part: Part) -> Result<f64> {
        let mut best: f64 = 0.0;
        for end in [End::Highest, End::Lowest] {
            let mut cfg = LanczosConfig::new(end, if end == End::Highest { f64::INFINITY } else { f64::NEG_INFINITY }, 1e-9);
            cfg.min_wanted = 1;
            let out = lanczos(&self.view(part), &cfg)?;
            best = best.max(out.extreme.abs());
        }
        Ok(best)
    }
}

pub struct BsView<'a> {
    op: &'a BSOperator,
    part: Part,
}

impl HermitianOperator for BsView<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.op.apply(self.part, x, y)
    }
}

/// a_m = sum_i u_i u_{i+m}, m = 0..n.
fn autocorrelation(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let p = 2 * n;
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(p, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(p).process(&mut buf);
    buf.iter_mut().for_each(|v| *v = Complex64::new(v.norm_sqr(), 0.0));
    planner.plan_fft_inverse(p).process(&mut buf);
    buf[..n].iter().map(|v| (v.re / p as f64).max(0.0)).collect()
}

/// sum_{i,j} u_i u_j |c_{i-j}|^2 for a Hermitian Toeplitz symbol c.
fn weighted_frobenius_sq(u: &[f64], column: &[Complex64]) -> f64 {
    let a = autocorrelation(u);
    column
        .iter()
        .zip(&a)
        .enumerate()
        .map(|(m, (c, w))| if m == 0 { c.norm_sqr() * w } else { 2.0 * c.norm_sqr() * w })
        .sum()
}

const RESOLVENT_BAND: usize = 8;

/// int over [(m - 1/2)h, (m + 1/2)h] of |G_{-E}|^2.
fn green_sq_cell_integral(e: f64, h: f64, m: usize) -> Result<f64> {
    let f = |t: f64| if t == 0.0 { 0.0 } else { green_eval(e, t).map(|g| g.norm_sqr()).unwrap_or(0.0) };
    let (a, b) = ((m as f64 - 0.5) * h, (m as f64 + 0.5) * h);
    Ok(if m == 0 {
        2.0 * integrate_real(f, 0.0, b, 1e-16, 1e-13)
    } else {
        integrate_real(f, a, b, 1e-16, 1e-13)
    })
}

/// Kernels whose Hilbert-Schmidt norm can be evaluated.
pub enum HsKernel<'a> {
    /// K_{-E}.
    Birman(&'a BSOperator),
    /// M_{-E}.
    Remainder(&'a BSOperator),
    /// G_lambda * (u .), lambda < 0.
    Resolvent { grid: &'a PhysicalGrid, u: &'a [f64], lambda: f64 },
}

/// Frobenius norm of the discretised kernel. For the resolvent kernel the
/// entries next to the diagonal carry the exact cell integrals of |G|^2.
pub fn hs_norm(kernel: HsKernel<'_>) -> Result<f64> {
    match kernel {
        HsKernel::Birman(op) => Ok(weighted_frobenius_sq(&op.u, op.kernel.column()).sqrt()),
        HsKernel::Remainder(op) => Ok(weighted_frobenius_sq(&op.u, op.remainder.column()).sqrt()),
        HsKernel::Resolvent { grid, u, lambda } => {
            if !(lambda < 0.0) {
                return Err(Error::Parameter(format!("lambda = {lambda} must be negative")));
            }
            let n = grid.n_points;
            let h = grid.spacing();
            let c = green_cell_integrals(-lambda, h, n)?;
            // |c_m|^2 / h is the squared cell average of G; near the diagonal the log
            // and the sign jump of G make that a poor stand-in for the cell integral
            // of |G|^2, so the first few offsets use the latter directly.
            let band = RESOLVENT_BAND.min(n);
            let mut weight: Vec<f64> = c.iter().map(|v| v.norm_sqr()).collect();
            for (m, w) in weight.iter_mut().enumerate().take(band) {
                *w = h * green_sq_cell_integral(-lambda, h, m)?;
            }
            // T[i, j] = c_{i-j} u_j: each offset m pairs with the u_j for which i = j + m is on the grid.
            let mut prefix = vec![0.0; n + 1];
            for j in 0..n {
                prefix[j + 1] = prefix[j] + u[j] * u[j];
            }
            let mut total = weight[0] * prefix[n];
            for m in 1..n {
                let below = prefix[n - m];
                let above = prefix[n] - prefix[m];
                total += weight[m] * (below + above);
            }
            Ok(total.sqrt())
        }
    }
}

/// ||M_{-E} - M_0||_HS on the grid of `op`; zero at E = 0 by definition.
pub fn hs_continuity(u: &[f64], grid: &PhysicalGrid, e: f64, cutoff: &CutoffSpec) -> Result<f64> {
    if e == 0.0 {
        return Ok(0.0);
    }
    let op = assemble_k(u, grid, e, cutoff)?;
    let n0 = n0_cell_integrals(cutoff.log_constant(), grid.spacing(), grid.n_points);
    let diff: Vec<Complex64> = op.remainder.column().iter().zip(&n0).map(|(a, b)| a - b).collect();
    Ok(weighted_frobenius_sq(u, &diff).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsCount {
    pub e: f64,
    /// #{eigenvalues of K_{-E} >= 1 - tol}.
    pub count: usize,
    /// #{discrete eigenvalues of L_u <= -E + tol_stab}.
    pub cross_check: usize,
    pub strict_count: usize,
    pub strict_cross_check: usize,
    pub top_eigenvalues: Vec<f64>,
    pub discrete_eigenvalues: Vec<f64>,
    pub tolerance: f64,
    pub agree: bool,
}

/// Default band around the threshold inside which an eigenvalue of K counts as equal to 1.
pub const BS_COUNT_TOL: f64 = 2e-3;

/// Counts eigenvalues of K_{-E} above 1 and compares with the discrete eigenvalues
/// of L_u below -E. Eigenvalues inside the tolerance bands are counted on both sides,
/// so that a bound state sitting exactly at -E is not split by discretisation bias.
pub fn bs_count(op: &BSOperator, discrete: &[f64], tol_stab: f64) -> Result<BsCount> {
    let tol = BS_COUNT_TOL;
    let top = op.top_eigenvalues(0.5)?;
    let count = top.iter().filter(|&&v| v >= 1.0 - tol).count();
    let strict_count = top.iter().filter(|&&v| v > 1.0).count();
    let cross_check = discrete.iter().filter(|&&l| l <= -op.e + tol_stab).count();
    let strict_cross_check = discrete.iter().filter(|&&l| l < -op.e).count();
    let agree = count == cross_check;
    let out = BsCount {
        e: op.e,
        count,
        cross_check,
        strict_count,
        strict_cross_check,
        top_eigenvalues: top,
        discrete_eigenvalues: discrete.to_vec(),
        tolerance: tol,
        agree,
    };
    if !agree {
        return Err(Error::Correspondence(format!(
            "E = {}: K has {} eigenvalues above 1 ({:?}) but L_u has {} below -E ({:?})",
            out.e, out.count, out.top_eigenvalues, out.cross_check, out.discrete_eigenvalues
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;
    use faer::{Mat, Side};

    fn small() -> (PhysicalGrid, Vec<f64>) {
        let g = PhysicalGrid::new(256, -25.0, 25.0).unwrap();
        let u = PotentialSpec::soliton(1.0, 0.0).sample(&g).unwrap();
        (g, u)
    }

    fn dense(op: &BSOperator, part: Part) -> Mat<faer::c64> {
        Mat::from_fn(op.dim(), op.dim(), |i, j| op.entry(part, i, j))
    }

    #[test]
    fn hermitian_and_split_exact() {
        let (g, u) = small();
        let op = assemble_k(&u, &g, 0.5, &CutoffSpec::default()).unwrap();
        assert!(op.hermitian_defect(Part::K) <= 1e-15);
        assert!(op.hermitian_defect(Part::M) <= 1e-15);
        // K - M is the rank-one (R/2pi) s s^T.
        let s = op.s();
        let r = op.r_e / (2.0 * PI);
        let mut diff = Mat::<f64>::zeros(op.dim(), op.dim());
        let mut worst: f64 = 0.0;
        for i in 0..op.dim() {
            for j in 0..op.dim() {
                let d = op.entry(Part::K, i, j) - op.entry(Part::M, i, j);
                worst = worst.max((d - s[i] * s[j] * r).norm());
                diff[(i, j)] = d.re;
            }
        }
        assert!(worst < 1e-14);
        let sv = diff.singular_values().unwrap();
        assert!(sv[1] < 1e-12 * sv[0]);
    }

    #[test]
    fn matvec_matches_dense() {
        let (g, u) = small();
        let op = assemble_k(&u, &g, 0.25, &CutoffSpec::default()).unwrap();
        let x: Vec<Complex64> = (0..op.dim()).map(|i| Complex64::new((i as f64).sin(), 0.1)).collect();
        let mut y = vec![Complex64::new(0.0, 0.0); op.dim()];
        op.apply(Part::K, &x, &mut y);
        for i in (0..op.dim()).step_by(17) {
            let d: Complex64 = (0..op.dim()).map(|j| op.entry(Part::K, i, j) * x[j]).sum();
            assert!((d - y[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_potential() {
        let g = PhysicalGrid::new(128, -10.0, 10.0).unwrap();
        let u = vec![0.0; 128];
        let op = assemble_k(&u, &g, 0.5, &CutoffSpec::default()).unwrap();
        assert_eq!(hs_norm(HsKernel::Birman(&op)).unwrap(), 0.0);
        assert!(op.top_eigenvalues(0.5).unwrap().is_empty());
        assert_eq!(hs_norm(HsKernel::Resolvent { grid: &g, u: &u, lambda: -0.5 }).unwrap(), 0.0);
        let c = bs_count(&op, &[], 1e-3).unwrap();
        assert_eq!((c.count, c.cross_check), (0, 0));
    }

    #[test]
    fn negative_samples_rejected() {
        let g = PhysicalGrid::new(128, -10.0, 10.0).unwrap();
        let mut u = vec![0.1; 128];
        u[5] = -1e-3;
        assert!(matches!(assemble_k(&u, &g, 0.5, &CutoffSpec::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn frobenius_shortcut_matches_dense() {
        let (g, u) = small();
        let op = assemble_k(&u, &g, 0.3, &CutoffSpec::default()).unwrap();
        for (part, kern) in [(Part::K, HsKernel::Birman(&op)), (Part::M, HsKernel::Remainder(&op))] {
            let d = dense(&op, part);
            let f = d.norm_l2();
            assert!((hs_norm(kern).unwrap() - f).abs() < 1e-12 * f);
        }
        let c = green_cell_integrals(0.5, g.spacing(), g.n_points).unwrap();
        let n = g.n_points;
        let mut f2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let cij = if i >= j { c[i - j] } else { c[j - i].conj() };
                f2 += (cij * u[j]).norm_sqr();
            }
        }
        let t = hs_norm(HsKernel::Resolvent { grid: &g, u: &u, lambda: -0.5 }).unwrap();
        // Only the near-diagonal band differs, and it can only add mass (Cauchy-Schwarz).
        assert!(t > f2.sqrt() && t < 1.05 * f2.sqrt());
    }

    #[test]
    fn lanczos_top_matches_dense() {
        let (g, u) = small();
        let op = assemble_k(&u, &g, 0.25, &CutoffSpec::default()).unwrap();
        let vals = dense(&op, Part::K).self_adjoint_eigenvalues(Side::Lower).unwrap();
        let top = op.top_eigenvalues(0.2).unwrap();
        let expected: Vec<f64> = vals.iter().rev().cloned().filter(|&v| v > 0.2).collect();
        assert_eq!(top.len(), expected.len());
        for (a, b) in top.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
        let norm = op.operator_norm(Part::M).unwrap();
        let mvals = dense(&op, Part::M).self_adjoint_eigenvalues(Side::Lower).unwrap();
        let exact = mvals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((norm - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn continuity_vanishes_at_zero() {
        let (g, u) = small();
        assert_eq!(hs_continuity(&u, &g, 0.0, &CutoffSpec::default()).unwrap(), 0.0);
    }
}
