use crate::quadrature::integrate_real;
use serde::{Deserialize, Serialize};

/// Smooth cutoff equal to 1 on [0, plateau] and 0 beyond `support`,
/// chi = h(1-t)/(h(1-t) + h(t)) with h(t) = e^{-1/t} and t = (xi - plateau)/(support - plateau).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub plateau: f64,
    pub support: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { plateau: 1.0, support: 2.0 }
    }
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

impl CutoffSpec {
    /// Second cutoff used to check that final observables do not depend on the choice.
    pub fn alternate() -> Self {
        CutoffSpec { plateau: 1.5, support: 3.0 }
    }

    pub fn chi(&self, xi: f64) -> f64 {
        let xi = xi.abs();
        if xi <= self.plateau {
            return 1.0;
        }
        if xi >= self.support {
            return 0.0;
        }
        let t = (xi - self.plateau) / (self.support - self.plateau);
        let a = bump(1.0 - t);
        a / (a + bump(t))
    }

    /// Stable FNV-1a fingerprint of the cutoff parameters.
    pub fn fingerprint(&self) -> String {
        let text = format!("smooth-bump:plateau={:e};support={:e}", self.plateau, self.support);
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// c_chi = lim_{E->0} (R(E) + log E) = log(plateau) + int_plateau^support chi/xi.
    pub fn log_constant(&self) -> f64 {
        self.plateau.ln() + integrate_real(|x| self.chi(x) / x, self.plateau, self.support, 1e-14, 1e-14)
    }
}

/// R(E) = int_0^inf chi(xi)/(xi + E) dxi, the plateau part in closed form.
pub fn split_r(e: f64, cutoff: &CutoffSpec) -> f64 {
    ((cutoff.plateau + e) / e).ln() + integrate_real(|x| cutoff.chi(x) / (x + e), cutoff.plateau, cutoff.support, 1e-13, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        let c = CutoffSpec::default();
        assert_eq!(c.chi(0.0), 1.0);
        assert_eq!(c.chi(1.0), 1.0);
        assert_eq!(c.chi(2.0), 0.0);
        assert!((c.chi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=100 {
            let v = c.chi(1.0 + k as f64 / 100.0);
            assert!((0.0..=1.0).contains(&v) && v <= prev);
            prev = v;
        }
        assert_ne!(c.fingerprint(), CutoffSpec::alternate().fingerprint());
        assert_eq!(c.fingerprint(), CutoffSpec::default().fingerprint());
    }

    #[test]
    fn r_sandwich_and_monotone() {
        let c = CutoffSpec::default();
        let mut prev = f64::INFINITY;
        for e in [1e-6, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0] {
            let r = split_r(e, &c);
            assert!(r >= ((1.0 + e) / e).ln() && r <= ((2.0 + e) / e).ln());
            assert!(r < prev);
            prev = r;
            assert!((r + e.ln() - c.log_constant()).abs() < 2.0 * e.max(1e-12) + 1e-10 || e > 1e-3);
        }
        let r = split_r(1e-3, &c);
        assert!(r > 1001f64.ln() && r < 2001f64.ln());
        // Plain adaptive quadrature of the definition as an oracle.
        let q = integrate_real(|x| c.chi(x) / (x + 1e-3), 0.0, 2.0, 1e-13, 1e-14);
        assert!((q - r).abs() < 1e-10);
    }
}
