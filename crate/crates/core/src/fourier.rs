//! Transforms with the convention f^(xi) = int e^{-ix xi} f(x) dx and
//! f(x) = (1/2pi) int e^{ix xi} f^(xi) dxi.

use crate::error::{Error, Result};
use crate::grid::{check_finite, FrequencyGrid, PhysicalGrid};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Angular frequencies of the FFT bins, in FFT order.
pub fn frequencies(grid: &PhysicalGrid) -> Vec<f64> {
    let n = grid.n_points;
    let dk = 2.0 * PI / grid.length();
    (0..n)
        .map(|m| if m < n / 2 { m as f64 * dk } else { (m as f64 - n as f64) * dk })
        .collect()
}

fn check(grid: &PhysicalGrid, f: &[Complex64]) -> Result<()> {
    grid.validate()?;
    if f.len() != grid.n_points {
        return Err(Error::Grid(format!("{} samples on a {}-point grid", f.len(), grid.n_points)));
    }
    check_finite(f)
}

pub fn fourier_forward(grid: &PhysicalGrid, f: &[Complex64]) -> Result<Vec<Complex64>> {
    check(grid, f)?;
    let mut buf = f.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    let h = grid.spacing();
    for (v, xi) in buf.iter_mut().zip(frequencies(grid)) {
        *v *= Complex64::from_polar(h, -grid.x_min * xi);
    }
    Ok(buf)
}

pub fn fourier_inverse(grid: &PhysicalGrid, fhat: &[Complex64]) -> Result<Vec<Complex64>> {
    check(grid, fhat)?;
    let scale = 1.0 / grid.length();
    let mut buf: Vec<Complex64> = fhat
        .iter()
        .zip(frequencies(grid))
        .map(|(v, xi)| v * Complex64::from_polar(scale, grid.x_min * xi))
        .collect();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    Ok(buf)
}

fn apply_multiplier<M: Fn(f64) -> Complex64>(grid: &PhysicalGrid, f: &[Complex64], m: M) -> Result<Vec<Complex64>> {
    check(grid, f)?;
    let n = f.len();
    let mut buf = f.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (v, xi) in buf.iter_mut().zip(frequencies(grid)) {
        *v *= m(xi) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Ok(buf)
}

/// Fourier multiplier -i sgn(xi); the zero bin is annihilated.
pub fn hilbert_transform(grid: &PhysicalGrid, f: &[Complex64]) -> Result<Vec<Complex64>> {
    apply_multiplier(grid, f, |xi| Complex64::new(0.0, -xi.signum() * (xi != 0.0) as i32 as f64))
}

/// Half-line frequency mask; the xi = 0 bin belongs to the plus side.
pub fn cauchy_project(grid: &PhysicalGrid, f: &[Complex64], sign: Sign) -> Result<Vec<Complex64>> {
    apply_multiplier(grid, f, |xi| {
        let keep = match sign {
            Sign::Plus => xi >= 0.0,
            Sign::Minus => xi < 0.0,
        };
        Complex64::new(keep as i32 as f64, 0.0)
    })
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm of C(fg) + (Cf)(Cg) - C(f Cg) - C(g Cf), and of C((Cf)(Cg)) - (Cf)(Cg);
/// the larger of the two is returned.
pub fn projection_identity_residual(grid: &PhysicalGrid, f: &[Complex64], g: &[Complex64], sign: Sign) -> Result<f64> {
    let mul = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let cf = cauchy_project(grid, f, sign)?;
    let cg = cauchy_project(grid, g, sign)?;
    let c_fg = cauchy_project(grid, &mul(f, g), sign)?;
    let cfcg = mul(&cf, &cg);
    let c_f_cg = cauchy_project(grid, &mul(f, &cg), sign)?;
    let c_g_cf = cauchy_project(grid, &mul(g, &cf), sign)?;
    let first: Vec<Complex64> = (0..f.len()).map(|k| c_fg[k] + cfcg[k] - c_f_cg[k] - c_g_cf[k]).collect();
    let c_cfcg = cauchy_project(grid, &cfcg, sign)?;
    let second: Vec<Complex64> = c_cfcg.iter().zip(&cfcg).map(|(a, b)| a - b).collect();
    Ok(max_norm(&first).max(max_norm(&second)))
}

/// Random field whose FFT occupies the lowest eighth of the bins on each side,
/// so that products of two such fields are computed without aliasing.
pub fn band_limited_field<R: rand::Rng>(grid: &PhysicalGrid, rng: &mut R) -> Vec<Complex64> {
    let n = grid.n_points;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n / 8 {
        spec[k] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        spec[n - 1 - k] = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec
}

/// Riemann sum h * sum_k f_k e^{-i x_k xi} at an arbitrary frequency.
pub fn fourier_at(grid: &PhysicalGrid, f: &[f64], xi: f64) -> Complex64 {
    let h = grid.spacing();
    let step = Complex64::from_polar(1.0, -h * xi);
    let mut w = Complex64::from_polar(1.0, -grid.x_min * xi);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, &v) in f.iter().enumerate() {
        if k % 256 == 0 {
            w = Complex64::from_polar(1.0, -grid.point(k) * xi);
        }
        acc += w * v;
        w *= step;
    }
    acc * h
}

/// The same Riemann sum at xi = m*step for m = 0..count.
pub fn fourier_at_multiples(grid: &PhysicalGrid, f: &[f64], step: f64, count: usize) -> Vec<Complex64> {
    fourier_at_progression(grid, f, 0.0, step, count)
}

/// Work above which the exponential sums go through the chirp-z transform.
const CHIRP_WORK: usize = 1 << 18;

/// y_i = sum_k c_k e^{i theta i k} for i = 0..m (Bluestein).
pub fn chirp_z(c: &[Complex64], theta: f64, m: usize) -> Vec<Complex64> {
    let k = c.len();
    if k == 0 || m == 0 {
        return vec![Complex64::new(0.0, 0.0); m];
    }
    let p = (k + m - 1).next_power_of_two();
    let chirp = |t: i64| Complex64::from_polar(1.0, 0.5 * theta * (t * t) as f64);
    let mut a = vec![Complex64::new(0.0, 0.0); p];
    for (j, v) in c.iter().enumerate() {
        a[j] = v * chirp(j as i64);
    }
    let mut b = vec![Complex64::new(0.0, 0.0); p];
    for t in -(k as i64 - 1)..m as i64 {
        b[t.rem_euclid(p as i64) as usize] = chirp(t).conj();
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(p);
    fwd.process(&mut a);
    fwd.process(&mut b);
    a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
    planner.plan_fft_inverse(p).process(&mut a);
    let s = 1.0 / p as f64;
    (0..m).map(|i| a[i] * chirp(i as i64) * s).collect()
}

/// The same Riemann sum at xi = start + m*step for m = 0..count.
pub fn fourier_at_progression(grid: &PhysicalGrid, f: &[f64], start: f64, step: f64, count: usize) -> Vec<Complex64> {
    let h = grid.spacing();
    if f.len() * count > CHIRP_WORK {
        let c: Vec<Complex64> = f.iter().enumerate().map(|(k, &v)| Complex64::from_polar(v * h, -(k as f64) * h * start)).collect();
        let y = chirp_z(&c, -h * step, count);
        let x0 = grid.x_min;
        return y.iter().enumerate().map(|(m, v)| v * Complex64::from_polar(1.0, -x0 * (start + step * m as f64))).collect();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); count];
    for (k, &v) in f.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let x = grid.point(k);
        let rot = Complex64::from_polar(1.0, -x * step);
        let mut w = Complex64::from_polar(v * h, -x * start);
        for (m, o) in out.iter_mut().enumerate() {
            if m % 512 == 0 && m > 0 {
                w = Complex64::from_polar(v * h, -x * (start + step * m as f64));
            }
            *o += w;
            w *= rot;
        }
    }
    out
}

/// Spacing of `xs` when it is an arithmetic progression.
fn uniform_step(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    let scale = xs[0].abs().max(xs[xs.len() - 1].abs()).max(h.abs());
    let ok = h != 0.0 && xs.iter().enumerate().all(|(i, &x)| (x - (xs[0] + h * i as f64)).abs() <= 1e-12 * scale);
    ok.then_some(h)
}

fn sinc_and_derivative(t: f64) -> (f64, f64) {
    if t.abs() < 0.1 {
        let t2 = t * t;
        let s = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)));
        let ds = -t / 3.0 * (1.0 - t2 / 10.0 * (1.0 - t2 / 28.0 * (1.0 - t2 / 54.0)));
        (s, ds)
    } else {
        let (sn, cs) = t.sin_cos();
        (sn / t, (t * cs - sn) / (t * t))
    }
}

/// (1/2pi) int_a^b p(xi) e^{i x xi} dxi for the linear p with p(a) = fa, p(b) = fb.
fn linear_segment(x: f64, a: f64, b: f64, fa: Complex64, fb: Complex64) -> Complex64 {
    let len = b - a;
    let (s, ds) = sinc_and_derivative(0.5 * x * len);
    let bracket = (fa + fb) * (0.5 * s) - Complex64::new(0.0, 0.5 * ds) * (fb - fa);
    Complex64::from_polar(len, x * 0.5 * (a + b)) * bracket
}

/// Physical-space values of a function whose transform is supported on
/// [0, xi_max] and sampled at the midpoint nodes of `fgrid`.
///
/// The samples are joined piecewise linearly, with end knots at 0 and xi_max
/// extrapolated quadratically from the three nearest nodes, and each piece is integrated in
/// closed form. This keeps the non-periodic 1/x tail that a plain sum loses.
pub fn half_line_to_physical(fgrid: &FrequencyGrid, values: &[Complex64], xs: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    assert_eq!(n, fgrid.n_modes);
    let d = fgrid.spacing();
    let (g0, gend) = match n {
        1 => (values[0], values[0]),
        2 => (values[0] * 1.5 - values[1] * 0.5, values[1] * 1.5 - values[0] * 0.5),
        _ => (
            (values[0] * 15.0 - values[1] * 10.0 + values[2] * 3.0) / 8.0,
            (values[n - 1] * 15.0 - values[n - 2] * 10.0 + values[n - 3] * 3.0) / 8.0,
        ),
    };
    let scale = 1.0 / (2.0 * PI);
    let ends = |x: f64| {
        linear_segment(x, 0.0, 0.5 * d, g0, values[0]) + linear_segment(x, fgrid.xi_max - 0.5 * d, fgrid.xi_max, values[n - 1], gend)
    };
    let weights = |x: f64| {
        let (s, ds) = sinc_and_derivative(0.5 * x * d);
        (Complex64::new(0.5 * s, 0.5 * ds) * d, Complex64::new(0.5 * s, -0.5 * ds) * d)
    };
    // Interior pieces: sum_j e^{i x (j+1) d} (v_j wl + v_{j+1} wr) for j < n - 1.
    if let (Some(h), true) = (uniform_step(xs), n >= 2 && n * xs.len() > CHIRP_WORK) {
        let x0 = xs[0];
        let shift = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter().enumerate().map(|(j, c)| c * Complex64::from_polar(1.0, x0 * d * (j + 1) as f64)).collect()
        };
        let sa = chirp_z(&shift(&values[..n - 1]), h * d, xs.len());
        let sb = chirp_z(&shift(&values[1..]), h * d, xs.len());
        return xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let (wl, wr) = weights(x);
                // chirp_z supplies e^{i (x - x0) j d}; the remaining (x - x0) d is one rotation.
                let rot = Complex64::from_polar(1.0, (x - x0) * d);
                (ends(x) + (sa[i] * wl + sb[i] * wr) * rot) * scale
            })
            .collect();
    }
    xs.iter()
        .map(|&x| {
            let mut acc = ends(x);
            if n >= 2 {
                let (wl, wr) = weights(x);
                let rot = Complex64::from_polar(1.0, x * d);
                let mut e = Complex64::new(0.0, 0.0);
                for j in 0..n - 1 {
                    if j % 256 == 0 {
                        e = Complex64::from_polar(1.0, x * d * (j as f64 + 1.0));
                    }
                    acc += e * (values[j] * wl + values[j + 1] * wr);
                    e *= rot;
                }
            }
            acc * scale
        })
        .collect()
}
