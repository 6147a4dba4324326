//! Hermitian Toeplitz matrix-vector products through circulant embedding.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// T[j, k] = t(j - k) with t(-m) = conj(t(m)), stored by its first column.
pub struct HermitianToeplitz {
    n: usize,
    column: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl HermitianToeplitz {
    pub fn new(column: Vec<Complex64>) -> Self {
        let n = column.len();
        let p = 2 * n.max(1);
        let mut c = vec![Complex64::new(0.0, 0.0); p];
        c[..n].copy_from_slice(&column);
        for m in 1..n {
            c[p - m] = column[m].conj();
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(p);
        let inverse = planner.plan_fft_inverse(p);
        forward.process(&mut c);
        let scale = 1.0 / p as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        HermitianToeplitz { n, column, spectrum: c, forward, inverse }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        if j >= k {
            self.column[j - k]
        } else {
            self.column[k - j].conj()
        }
    }

    pub fn column(&self) -> &[Complex64] {
        &self.column
    }

    /// y = T x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let p = self.spectrum.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); p];
        buf[..self.n].copy_from_slice(x);
        self.forward.process(&mut buf);
        buf.iter_mut().zip(&self.spectrum).for_each(|(b, s)| *b *= s);
        self.inverse.process(&mut buf);
        y.copy_from_slice(&buf[..self.n]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_product() {
        let n = 37;
        let col: Vec<Complex64> = (0..n)
            .map(|m| if m == 0 { Complex64::new(1.3, 0.0) } else { Complex64::new((m as f64).cos(), 0.2 * m as f64).unscale(m as f64) })
            .collect();
        let t = HermitianToeplitz::new(col);
        let x: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64 * 0.7).sin(), j as f64 * 0.01)).collect();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        t.apply(&x, &mut y);
        for j in 0..n {
            let direct: Complex64 = (0..n).map(|k| t.entry(j, k) * x[k]).sum();
            assert!((direct - y[j]).norm() < 1e-12);
        }
    }
}
