//! Lanczos iteration with full reorthogonalisation for extremal eigenpairs of
//! Hermitian operators available only through matrix-vector products.

use crate::error::{Error, Result};
use faer::{Mat, Side};
use num_complex::Complex64;

pub trait HermitianOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Lowest,
    Highest,
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosConfig {
    /// Which end of the spectrum is wanted.
    pub end: End,
    /// Every eigenvalue beyond this value (below for `Lowest`, above for `Highest`) is wanted.
    pub threshold: f64,
    /// Residual ||A v - theta v|| required of each wanted Ritz pair.
    pub tol: f64,
    pub max_steps: usize,
    pub check_every: usize,
    /// Consecutive checks over which the wanted set must stay unchanged.
    pub stable_checks: usize,
    /// Number of extremal pairs wanted regardless of the threshold.
    pub min_wanted: usize,
}

impl LanczosConfig {
    pub fn new(end: End, threshold: f64, tol: f64) -> Self {
        LanczosConfig { end, threshold, tol, max_steps: 1500, check_every: 25, stable_checks: 3, min_wanted: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct RitzPair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct LanczosOutcome {
    /// Wanted pairs, ascending for `Lowest`, descending for `Highest`.
    pub pairs: Vec<RitzPair>,
    pub steps: usize,
    /// Extremal Ritz value, wanted or not.
    pub extreme: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn start_vector(n: usize) -> Vec<Complex64> {
    // Deterministic, generic start vector.
    let mut v: Vec<Complex64> = (0..n)
        .map(|j| {
            let t = j as f64;
            Complex64::new(1.0 + 0.5 * (1.618_033_988_7 * t).sin(), 0.3 * (std::f64::consts::E * t + 0.4).cos())
        })
        .collect();
    let s = 1.0 / norm(&v);
    v.iter_mut().for_each(|x| *x *= s);
    v
}

pub fn lanczos<O: HermitianOperator + ?Sized>(op: &O, cfg: &LanczosConfig) -> Result<LanczosOutcome> {
    let n = op.dim();
    if n == 0 {
        return Ok(LanczosOutcome { pairs: Vec::new(), steps: 0, extreme: 0.0 });
    }
    let max_steps = cfg.max_steps.min(n);
    let mut basis: Vec<Vec<Complex64>> = vec![start_vector(n)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut history: Vec<Vec<f64>> = Vec::new();
    let mut exhausted = false;

    loop {
        let k = alpha.len();
        op.apply(&basis[k], &mut w);
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        let steps = alpha.len();
        let scale = alpha.iter().map(|x| x.abs()).fold(0.0, f64::max).max(beta.iter().cloned().fold(0.0, f64::max));
        if b <= 1e-13 * scale.max(1e-300) || steps >= n {
            exhausted = true;
        }
        let at_check = steps.is_multiple_of(cfg.check_every) || exhausted || steps >= max_steps;
        if at_check {
            let (vals, vecs) = tridiagonal_eigen(&alpha, &beta)?;
            let order: Vec<usize> = match cfg.end {
                End::Lowest => (0..steps).collect(),
                End::Highest => (0..steps).rev().collect(),
            };
            let wanted: Vec<usize> = order
                .iter()
                .cloned()
                .enumerate()
                .take_while(|&(rank, i)| {
                    rank < cfg.min_wanted
                        || match cfg.end {
                            End::Lowest => vals[i] < cfg.threshold,
                            End::Highest => vals[i] > cfg.threshold,
                        }
                })
                .map(|(_, i)| i)
                .collect();
            let res = |i: usize| if exhausted { 0.0 } else { (b * vecs[(steps - 1, i)]).abs() };
            let converged = wanted.iter().all(|&i| res(i) <= cfg.tol);
            let snapshot: Vec<f64> = wanted.iter().map(|&i| vals[i]).collect();
            let stable = converged
                && history.len() + 1 >= cfg.stable_checks
                && history.iter().rev().take(cfg.stable_checks - 1).all(|h| {
                    h.len() == snapshot.len() && h.iter().zip(&snapshot).all(|(p, q)| (p - q).abs() <= 10.0 * cfg.tol + 1e-12 * q.abs())
                });
            history.push(snapshot);
            if stable || exhausted || steps >= max_steps {
                if !(stable || exhausted) {
                    return Err(Error::Convergence(format!(
                        "Lanczos: {} steps without a stable converged set (wanted {})",
                        steps,
                        wanted.len()
                    )));
                }
                let pairs = wanted
                    .iter()
                    .map(|&i| {
                        let mut v = vec![Complex64::new(0.0, 0.0); n];
                        for (j, q) in basis.iter().enumerate() {
                            let s = vecs[(j, i)];
                            v.iter_mut().zip(q).for_each(|(x, y)| *x += y * s);
                        }
                        let s = 1.0 / norm(&v);
                        v.iter_mut().for_each(|x| *x *= s);
                        RitzPair { value: vals[i], vector: v, residual: res(i) }
                    })
                    .collect();
                return Ok(LanczosOutcome { pairs, steps, extreme: vals[order[0]] });
            }
        }
        beta.push(b);
        let s = 1.0 / b;
        basis.push(w.iter().map(|x| x * s).collect());
    }
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> Result<(Vec<f64>, Mat<f64>)> {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let e = t
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("tridiagonal eigensolve failed: {e:?}")))?;
    let vals: Vec<f64> = (0..m).map(|i| e.S().column_vector()[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// Dense Hermitian operator, mostly for tests.
pub struct DenseHermitian {
    pub n: usize,
    pub entries: Vec<Complex64>,
}

impl HermitianOperator for DenseHermitian {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.n).map(|j| self.entries[i * self.n + j] * x[j]).sum();
        }
    }
}
