//! G_{-E}(x) = (1/2pi) int_0^inf e^{ix xi}/(xi + E) dxi = (1/2pi) e^{-ixE} E1(-iEx).

use crate::error::{Error, Result};
use crate::special::{exp_integral_e1, series_tail, EULER_GAMMA};
use num_complex::Complex64;
use std::f64::consts::PI;

fn check_depth(e: f64) -> Result<()> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Parameter(format!("spectral depth E = {e} must be positive")));
    }
    Ok(())
}

pub fn green_eval(e: f64, x: f64) -> Result<Complex64> {
    check_depth(e)?;
    if x == 0.0 {
        return Err(Error::Domain("G is log-singular at x = 0".into()));
    }
    let z = Complex64::new(0.0, -e * x);
    Ok(z.exp() * exp_integral_e1(z)? / (2.0 * PI))
}

/// f(z) = e^z E1(z) + log z + gamma, evaluated without cancellation near 0.
fn regular_part(z: Complex64) -> Result<Complex64> {
    if z.norm() < 0.5 {
        // e^z E1(z) = e^z (-gamma - log z - S(z)), so f = -(e^z - 1)(gamma + log z) - e^z S(z).
        let mut term = Complex64::new(1.0, 0.0);
        let mut expm1 = Complex64::new(0.0, 0.0);
        for k in 1..40 {
            term *= z / k as f64;
            expm1 += term;
        }
        Ok(-expm1 * (EULER_GAMMA + z.ln()) - z.exp() * series_tail(z))
    } else {
        Ok(z.exp() * exp_integral_e1(z)? + z.ln() + EULER_GAMMA)
    }
}

/// A(x) = int_0^x G_{-E}(t) dt = -f(-iEx)/(2 pi i E), continuous with A(0) = 0.
pub fn green_antiderivative(e: f64, x: f64) -> Result<Complex64> {
    check_depth(e)?;
    if x == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z = Complex64::new(0.0, -e * x);
    Ok(-regular_part(z)? / Complex64::new(0.0, 2.0 * PI * e))
}

/// Cell integrals c_m = int over [(m - 1/2)h, (m + 1/2)h] of G_{-E}, m = 0..n.
/// c_{-m} = conj(c_m), so these form the first column of a Hermitian Toeplitz matrix.
pub fn green_cell_integrals(e: f64, h: f64, n: usize) -> Result<Vec<Complex64>> {
    let edges: Vec<Complex64> = (0..=n).map(|m| green_antiderivative(e, (m as f64 + 0.5) * h)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(n);
    if n > 0 {
        // A(-h/2) = -conj(A(h/2)).
        out.push(edges[0] + edges[0].conj());
    }
    for m in 1..n {
        out.push(edges[m] - edges[m - 1]);
    }
    Ok(out)
}

/// Antiderivative of (1/2pi) N_0(t) = (1/2pi)(-gamma - log|t| + i pi/2 sgn t - c_chi), zero at 0.
pub fn n0_antiderivative(c_chi: f64, t: f64) -> Complex64 {
    let log_part = if t == 0.0 { 0.0 } else { t * t.abs().ln() - t };
    Complex64::new(-(EULER_GAMMA + c_chi) * t - log_part, 0.5 * PI * t.abs()) / (2.0 * PI)
}

pub fn n0_cell_integrals(c_chi: f64, h: f64, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| n0_antiderivative(c_chi, (m as f64 + 0.5) * h) - n0_antiderivative(c_chi, (m as f64 - 0.5) * h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_real};

    #[test]
    fn conjugate_symmetry() {
        for (e, x) in [(1.0, 2.0), (0.25, 0.3), (2.0, 17.0), (0.5, 1e-3)] {
            let a = green_eval(e, -x).unwrap();
            let b = green_eval(e, x).unwrap().conj();
            assert!((a - b).norm() <= 1e-15 * b.norm());
        }
        assert!(green_eval(1.0, 0.0).is_err());
        assert!(green_eval(-1.0, 1.0).is_err());
    }

    // Parseval: G^ = chi_{xi > 0}/(xi + E), so int |G|^2 dx = (1/2pi) int_0^inf (xi+E)^{-2} = 1/(2 pi E).
    // Quadrature on [-X, X] plus the tails from |G|^2 = (1/(4 pi^2 E^2 x^2))(1 - 3/(Ex)^2 + ...).
    fn l2_norm_sq(e: f64) -> f64 {
        let x_far = 200.0 / e;
        let f = |x: f64| green_eval(e, x).unwrap().norm_sqr();
        let mut total = 0.0;
        let mut a = 0.0;
        for b in [1e-6 / e, 1e-3 / e, 0.1 / e, 1.0 / e, 10.0 / e, 50.0 / e, x_far] {
            total += integrate_real(f, a, b, 1e-15, 1e-12);
            a = b;
        }
        let tail = (1.0 / x_far - 1.0 / (e * e * x_far.powi(3))) / (4.0 * PI * PI * e * e);
        2.0 * (total + tail)
    }

    #[test]
    fn parseval_norm() {
        for e in [0.25, 0.5, 1.0, 2.0] {
            let q = l2_norm_sq(e);
            assert!((q * 2.0 * PI * e - 1.0).abs() < 1e-6, "E={e}: {q}");
        }
    }

    #[test]
    fn decay_bound_on_log_grid() {
        // Integration by parts: |G(x)| <= 1/(2 pi E |x|) * (1 + O(1/(E|x|))).
        for e in [0.5, 1.0] {
            for k in 0..30 {
                let x = 10f64.powf(0.5 + 0.15 * k as f64);
                let g = green_eval(e, x).unwrap().norm();
                assert!(g * 2.0 * PI * e * x <= 1.0 + 2.0 / (e * x));
            }
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        for e in [1e-4, 0.1, 0.5, 2.0] {
            for x in [-3.0, -0.05, 0.01, 0.7, 12.0] {
                let a = green_antiderivative(e, x).unwrap();
                // log singularity at 0: split off a tiny cell
                let q = integrate(|t| green_eval(e, t).unwrap(), 0.0, x, 1e-14, 1e-13);
                assert!((a - q).norm() < 1e-10 * (1.0 + q.norm()), "E={e} x={x}: {a} vs {q}");
            }
        }
    }

    #[test]
    fn small_depth_limit_is_n0() {
        // As E -> 0, cell integrals of G minus (R/2pi) h approach those of N_0/(2pi)
        // with R(E) = -log E + c_chi + O(E).
        let h = 0.1;
        let c_chi = 0.3;
        let e: f64 = 1e-9;
        let r = -e.ln() + c_chi;
        let g = green_cell_integrals(e, h, 5).unwrap();
        let n0 = n0_cell_integrals(c_chi, h, 5);
        for m in 0..5 {
            let d = g[m] - Complex64::new(r * h / (2.0 * PI), 0.0) - n0[m];
            assert!(d.norm() < 1e-7, "m={m}: {d}");
        }
    }
}
