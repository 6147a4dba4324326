//! Rank-one secular equation lambda (R/2pi) (s, (1 - lambda M)^{-1} s) = 1 and the
//! boundedness scan of ||K||_HS^2 - 1/lambda^2.

use super::birman::{assemble_k, hs_norm, BSOperator, HsKernel, Part};
use super::cutoff::CutoffSpec;
use crate::error::{Error, Result};
use crate::grid::PhysicalGrid;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecularSolve {
    pub e: f64,
    pub lambda_root: f64,
    pub lambda0: f64,
    pub iterations: usize,
    /// |lambda (R/2pi) (s, (1 - lambda M)^{-1} s) - 1| at the root.
    pub residual: f64,
    /// The eigenvalue of K_{-E} above 1/lambda0.
    pub top_eigenvalue: f64,
    /// |1/lambda_root - top_eigenvalue| / top_eigenvalue.
    pub eigen_mismatch: f64,
    pub r_e: f64,
    pub integral_u: f64,
    /// lambda_root R(E) int u / (2 pi), which tends to 1 as E -> 0.
    pub leading_ratio: f64,
    pub m_norm: f64,
    pub cutoff: String,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Conjugate gradients for (1 - lambda M) y = b, which is positive definite when lambda ||M|| < 1.
fn solve_shifted(op: &BSOperator, lambda: f64, b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = b.len();
    let apply = |x: &[Complex64], out: &mut [Complex64]| {
        op.apply(Part::M, x, out);
        out.iter_mut().zip(x).for_each(|(o, xi)| *o = xi - *o * lambda);
    };
    let mut x = b.to_vec();
    let mut ax = vec![Complex64::new(0.0, 0.0); n];
    apply(&x, &mut ax);
    let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let bb = dot(b, b).re;
    let mut ap = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..1000 {
        if rr.sqrt() <= 1e-15 * bb.sqrt() {
            return Ok(x);
        }
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap).re;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += pi * alpha);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= api * alpha);
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        rr = rr_new;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + *pi * beta);
    }
    if rr.sqrt() <= 1e-12 * bb.sqrt() {
        return Ok(x);
    }
    Err(Error::Convergence(format!("CG for (1 - lambda M) stalled at relative residual {:.2e}", (rr / bb).sqrt())))
}

struct Secular<'a> {
    op: &'a BSOperator,
    s: Vec<Complex64>,
    r: f64,
    int_u: f64,
}

impl Secular<'_> {
    /// (s, (1 - lambda M)^{-1} s).
    fn quadratic_form(&self, lambda: f64) -> Result<f64> {
        let y = solve_shifted(self.op, lambda, &self.s)?;
        Ok(dot(&self.s, &y).re)
    }

    /// F(lambda) = (1/int u) (1/r - lambda (s, ((1 - lambda M)^{-1} - 1) s)).
    fn map(&self, lambda: f64) -> Result<f64> {
        let q = self.quadratic_form(lambda)?;
        Ok((1.0 / self.r - lambda * (q - self.int_u)) / self.int_u)
    }
}

pub fn secular_solve(op: &BSOperator, lambda0: Option<f64>) -> Result<SecularSolve> {
    let s = op.s();
    let int_u = dot(&s, &s).re;
    if int_u <= 0.0 {
        return Err(Error::Precondition("secular equation needs int u > 0".into()));
    }
    let m_norm = op.operator_norm(Part::M)?;
    let lambda0 = lambda0.unwrap_or(0.9 / m_norm.max(1e-300));
    if !(lambda0 > 0.0) || lambda0 * m_norm >= 1.0 {
        return Err(Error::Range(format!("lambda0 = {lambda0:.4e} violates lambda0 ||M|| < 1 (||M|| = {m_norm:.4e})")));
    }
    let sec = Secular { op, s, r: op.r_e / (2.0 * PI), int_u };
    // The map must send [0, lambda0] into itself with Lipschitz constant below 1.
    let probes = [0.0, 0.25 * lambda0, 0.5 * lambda0, 0.75 * lambda0, lambda0];
    let vals: Vec<f64> = probes.iter().map(|&l| sec.map(l)).collect::<Result<_>>()?;
    if vals.iter().any(|&v| !(v > 0.0 && v <= lambda0)) {
        return Err(Error::Range(format!(
            "E = {}: the fixed-point map leaves [0, {lambda0:.4e}] (values {vals:?})",
            op.e
        )));
    }
    let lip = probes.windows(2).zip(vals.windows(2)).map(|(p, v)| ((v[1] - v[0]) / (p[1] - p[0])).abs()).fold(0.0, f64::max);
    if lip >= 1.0 {
        return Err(Error::Range(format!("E = {}: secant Lipschitz estimate {lip:.3} is not a contraction", op.e)));
    }
    let mut lambda = 0.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next = sec.map(lambda)?;
        let step = (next - lambda).abs();
        lambda = next;
        if step <= 1e-15 * lambda {
            break;
        }
        if iterations >= 200 {
            return Err(Error::Convergence(format!("secular iteration: 200 steps, last step {step:.2e}")));
        }
    }
    let residual = (lambda * sec.r * sec.quadratic_form(lambda)? - 1.0).abs();
    let top = op.top_eigenvalues(1.0 / lambda0)?;
    if top.len() != 1 {
        return Err(Error::Convergence(format!(
            "expected exactly one eigenvalue of K above 1/lambda0 = {:.4e}, found {top:?}",
            1.0 / lambda0
        )));
    }
    let eigen_mismatch = (1.0 / lambda - top[0]).abs() / top[0];
    Ok(SecularSolve {
        e: op.e,
        lambda_root: lambda,
        lambda0,
        iterations,
        residual,
        top_eigenvalue: top[0],
        eigen_mismatch,
        r_e: op.r_e,
        integral_u: int_u,
        leading_ratio: lambda * op.r_e * int_u / (2.0 * PI),
        m_norm,
        cutoff: op.cutoff.fingerprint(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub e: f64,
    pub count: usize,
    pub hs_k_sq: f64,
    pub inv_lambda_sq: f64,
    /// ||K||_HS^2 - 1/lambda_root^2.
    pub bound_value: f64,
    pub lambda_root: f64,
    pub leading_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub max_bound: f64,
    /// max / min of the bound values.
    pub band_ratio: f64,
    /// ||K||_HS^2 at the last E over that at the first.
    pub hs_growth: f64,
    pub count_constant_tail: bool,
    pub cutoff: String,
}

pub fn count_bound_scan(u: &[f64], grid: &PhysicalGrid, energies: &[f64], cutoff: &CutoffSpec) -> Result<ScanReport> {
    let zero = u.iter().all(|&v| v == 0.0);
    let mut rows = Vec::new();
    for &e in energies {
        if zero {
            rows.push(ScanRow { e, count: 0, hs_k_sq: 0.0, inv_lambda_sq: 0.0, bound_value: 0.0, lambda_root: 0.0, leading_ratio: 0.0 });
            continue;
        }
        let op = assemble_k(u, grid, e, cutoff)?;
        let sol = secular_solve(&op, None)?;
        let hs = hs_norm(HsKernel::Birman(&op))?;
        let count = op.top_eigenvalues(0.5)?.iter().filter(|&&v| v > 1.0).count();
        let inv = 1.0 / (sol.lambda_root * sol.lambda_root);
        rows.push(ScanRow {
            e,
            count,
            hs_k_sq: hs * hs,
            inv_lambda_sq: inv,
            bound_value: hs * hs - inv,
            lambda_root: sol.lambda_root,
            leading_ratio: sol.leading_ratio,
        });
    }
    let bounds: Vec<f64> = rows.iter().map(|r| r.bound_value).collect();
    let max_bound = bounds.iter().cloned().fold(0.0, f64::max);
    let min_bound = bounds.iter().cloned().fold(f64::INFINITY, f64::min);
    let band_ratio = if zero || rows.is_empty() { 1.0 } else { max_bound / min_bound };
    let hs_growth = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if a.hs_k_sq > 0.0 => b.hs_k_sq / a.hs_k_sq,
        _ => 1.0,
    };
    let tail = rows.len().saturating_sub(rows.len() / 2 + 1);
    let count_constant_tail = rows[tail..].windows(2).all(|w| w[0].count == w[1].count);
    Ok(ScanReport { rows, max_bound, band_ratio, hs_growth, count_constant_tail, cutoff: cutoff.fingerprint() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;

    fn weak() -> (PhysicalGrid, Vec<f64>) {
        let g = PhysicalGrid::new(1024, -50.0, 50.0).unwrap();
        let u = PotentialSpec::soliton(1.0, 0.0).with_coupling(0.05).sample(&g).unwrap();
        (g, u)
    }

    #[test]
    fn root_matches_top_eigenvalue() {
        let (g, u) = weak();
        let op = assemble_k(&u, &g, 1e-3, &CutoffSpec::default()).unwrap();
        let sol = secular_solve(&op, None).unwrap();
        assert!(sol.residual <= 1e-12, "{sol:?}");
        assert!(sol.eigen_mismatch <= 1e-6, "{sol:?}");
        assert!(sol.lambda_root > 0.0 && sol.lambda_root <= sol.lambda0);
    }

    #[test]
    fn root_is_cutoff_independent() {
        let (g, u) = weak();
        let a = secular_solve(&assemble_k(&u, &g, 1e-2, &CutoffSpec::default()).unwrap(), None).unwrap();
        let b = secular_solve(&assemble_k(&u, &g, 1e-2, &CutoffSpec::alternate()).unwrap(), None).unwrap();
        assert!((a.lambda_root - b.lambda_root).abs() <= 1e-6 * a.lambda_root);
        assert_ne!(a.cutoff, b.cutoff);
    }

    #[test]
    fn zero_potential_is_rejected() {
        let g = PhysicalGrid::new(64, -5.0, 5.0).unwrap();
        let op = assemble_k(&vec![0.0; 64], &g, 1e-2, &CutoffSpec::default()).unwrap();
        assert!(matches!(secular_solve(&op, None), Err(Error::Precondition(_))));
        let scan = count_bound_scan(&vec![0.0; 64], &g, &[1e-2, 1e-3], &CutoffSpec::default()).unwrap();
        assert!(scan.rows.iter().all(|r| r.bound_value == 0.0 && r.hs_k_sq == 0.0));
    }

    #[test]
    fn oversized_lambda0_is_a_range_error() {
        let (g, u) = weak();
        let op = assemble_k(&u, &g, 1e-2, &CutoffSpec::default()).unwrap();
        assert!(matches!(secular_solve(&op, Some(1e6)), Err(Error::Range(_))));
    }
}
