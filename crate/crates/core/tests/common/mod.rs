//! Closed-form oracles shared by the integration tests. Derivations are in
//! docs/oracles.md; nothing here calls into the library's numerics.
#![allow(dead_code)]

use num_complex::Complex64;

/// Soliton profile u(x) = 2 nu / (1 + nu^2 (x - x0)^2).
pub fn soliton_profile(nu: f64, x0: f64, x: f64) -> f64 {
    let t = nu * (x - x0);
    2.0 * nu / (1.0 + t * t)
}

/// Residue calculus: phi = 1/(x - x0 + i/nu) solves L_u phi = -nu/2 phi.
pub fn soliton_eigenvalue(nu: f64) -> f64 {
    -0.5 * nu
}

/// The eigenfunction above, already satisfying int u phi = 2 pi i lambda.
pub fn soliton_eigenfunction(nu: f64, x0: f64, x: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(x - x0, 1.0 / nu)
}

/// int u phi dx = -i pi nu for the eigenfunction above.
pub fn soliton_overlap(nu: f64) -> Complex64 {
    Complex64::new(0.0, -std::f64::consts::PI * nu)
}

/// The soliton is reflectionless, H(lambda) = 0, so 1 = (x + gamma) phi.
pub fn soliton_phase_constant(nu: f64, x0: f64) -> Complex64 {
    Complex64::new(-x0, 1.0 / nu)
}

/// Travelling-wave speed of the soliton of parameter nu.
pub fn soliton_speed(nu: f64) -> f64 {
    nu
}

/// ||u||_2^2 = 2 pi nu for the soliton.
pub fn soliton_l2_sq(nu: f64) -> f64 {
    2.0 * std::f64::consts::PI * nu
}

/// Widely separated humps: the spectrum tends to the union of single-hump spectra.
pub fn separated_solitons_spectrum(nus: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = nus.iter().map(|&n| soliton_eigenvalue(n)).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
