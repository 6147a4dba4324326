//! Principal-branch exponential integral E1 for complex arguments.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E1(z) = int_z^inf e^{-t}/t dt on the principal branch |arg z| < pi.
///
/// Power series for |z| <= 4, modified Lentz evaluation of the continued
/// fraction otherwise.
pub fn exp_integral_e1(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("E1 argument not finite: {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(Error::Domain(format!("E1 argument on the branch cut: {z}")));
    }
    if z.norm() <= 4.0 {
        Ok(-EULER_GAMMA - z.ln() - series_tail(z))
    } else {
        Ok((-z).exp() * continued_fraction(z)?)
    }
}

/// S(z) = sum_{k>=1} (-z)^k / (k k!), so that E1(z) = -gamma - log z - S(z).
pub(crate) fn series_tail(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..200 {
        let kf = k as f64;
        term *= -z / kf;
        let add = term / kf;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

/// e^{z} E1(z) = 1/(z+1- 1/(z+3- 4/(z+5- ...))).
fn continued_fraction(z: Complex64) -> Result<Complex64> {
    let tiny = 1e-300;
    let mut f = z + 1.0;
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..20_000 {
        let kf = k as f64;
        let a = -kf * kf;
        let b = z + (2.0 * kf + 1.0);
        d = b + a * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        d = d.inv();
        c = b + a / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(f.inv());
        }
    }
    Err(Error::Numeric(format!("E1 continued fraction did not converge at {z}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    // Oracle: E1(z) = int_0^inf e^{-(z+s)}/(z+s) ds along the horizontal ray,
    // which never meets the cut for Im z != 0 or Re z > 0.
    fn oracle(z: Complex64) -> Complex64 {
        let f = |s: f64| {
            let w = z + s;
            (-w).exp() / w
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut a = 0.0;
        for b in [0.5, 2.0, 8.0, 20.0, 45.0, 80.0] {
            total += integrate(f, a, b, 1e-16, 1e-14);
            a = b;
        }
        total
    }

    #[test]
    fn e1_at_one() {
        let v = exp_integral_e1(Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 0.219_383_934_395_520_3).abs() < 1e-13);
        assert!(v.im.abs() < 1e-15);
        let q = oracle(Complex64::new(1.0, 0.0));
        assert!((v - q).norm() < 1e-9);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let pts = [
            (0.1, 0.0),
            (0.5, 0.5),
            (0.0, 0.3),
            (0.0, -3.9),
            (0.0, 4.1),
            (0.0, -12.0),
            (3.0, 3.0),
            (6.0, -1.0),
            (-2.0, 2.5),
            (-3.0, 5.0),
            (0.0, 40.0),
            (15.0, 0.0),
        ];
        for (re, im) in pts {
            let z = Complex64::new(re, im);
            let v = exp_integral_e1(z).unwrap();
            let q = oracle(z);
            assert!((v - q).norm() <= 1e-12 * q.norm().max(1e-300), "z={z} v={v} q={q}");
        }
    }

    #[test]
    fn series_and_fraction_agree_at_switch() {
        for k in 0..16 {
            let th = -1.5 + 3.0 * k as f64 / 15.0;
            let z = Complex64::from_polar(4.0, th);
            let s = -EULER_GAMMA - z.ln() - series_tail(z);
            let c = (-z).exp() * continued_fraction(z).unwrap();
            assert!((s - c).norm() <= 1e-12 * c.norm(), "theta={th}");
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        let mut prev = f64::INFINITY;
        for x in [10.0, 50.0, 200.0, 600.0] {
            let z = Complex64::new(x, 0.0);
            let r = (z * z.exp() * exp_integral_e1(z).unwrap()).re;
            let dev = (r - 1.0).abs();
            assert!(dev < prev);
            assert!(dev <= 1.5 / x);
            prev = dev;
        }
    }

    #[test]
    fn schwarz_reflection() {
        for (re, im) in [(0.3, 1.0), (-1.0, 0.7), (5.0, 5.0), (0.0, 9.0)] {
            let z = Complex64::new(re, im);
            let a = exp_integral_e1(z.conj()).unwrap();
            let b = exp_integral_e1(z).unwrap().conj();
            assert!((a - b).norm() <= 1e-15 * b.norm());
        }
    }

    #[test]
    fn cut_is_rejected() {
        assert!(exp_integral_e1(Complex64::new(-1.0, 0.0)).is_err());
        assert!(exp_integral_e1(Complex64::new(0.0, 0.0)).is_err());
    }
}
