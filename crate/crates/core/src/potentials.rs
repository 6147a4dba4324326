//! Parametric and tabulated real potentials.

use crate::error::{Error, Result};
use crate::fourier::fourier_at_progression;
use crate::grid::PhysicalGrid;
use crate::quadrature::integrate_real;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Soliton {
    pub nu: f64,
    #[serde(default)]
    pub center: f64,
}

impl Soliton {
    fn eval(&self, x: f64) -> f64 {
        let t = self.nu * (x - self.center);
        2.0 * self.nu / (1.0 + t * t)
    }

    fn transform(&self, xi: f64) -> Complex64 {
        Complex64::from_polar(2.0 * PI * (-xi.abs() / self.nu).exp(), -xi * self.center)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Soliton(Soliton),
    MultiSoliton { solitons: Vec<Soliton> },
    Gaussian { amplitude: f64, width: f64 },
    Sech2 { amplitude: f64, width: f64 },
    FromFile { path: PathBuf },
    /// Samples (x_k, u_k) with strictly increasing x, joined linearly, zero outside.
    Tabulated { x: Vec<f64>, u: Vec<f64> },
}

/// A real potential together with the coupling constant multiplying it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default = "unit")]
    pub coupling: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub xl2: f64,
    /// Fraction of the L1 mass lying outside the physical window.
    pub window_tail: f64,
    pub warnings: Vec<String>,
}

impl PotentialSpec {
    pub fn soliton(nu: f64, center: f64) -> Self {
        PotentialSpec { family: Family::Soliton(Soliton { nu, center }), coupling: 1.0 }
    }

    pub fn multi_soliton(pairs: &[(f64, f64)]) -> Self {
        let solitons = pairs.iter().map(|&(nu, center)| Soliton { nu, center }).collect();
        PotentialSpec { family: Family::MultiSoliton { solitons }, coupling: 1.0 }
    }

    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        PotentialSpec { family: Family::Gaussian { amplitude, width }, coupling: 1.0 }
    }

    pub fn sech2(amplitude: f64, width: f64) -> Self {
        PotentialSpec { family: Family::Sech2 { amplitude, width }, coupling: 1.0 }
    }

    pub fn zero() -> Self {
        PotentialSpec { family: Family::MultiSoliton { solitons: Vec::new() }, coupling: 1.0 }
    }

    pub fn tabulated(x: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let spec = PotentialSpec { family: Family::Tabulated { x, u }, coupling: 1.0 };
        spec.validate()?;
        Ok(spec)
    }

    /// Samples on a uniform grid, treated as a tabulated potential.
    pub fn from_samples(grid: &PhysicalGrid, u: &[f64]) -> Result<Self> {
        Self::tabulated(grid.points(), u.to_vec())
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    /// Reads a `from_file` spec into memory; other families are returned unchanged.
    pub fn load(&self) -> Result<Self> {
        match &self.family {
            Family::FromFile { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
                let (x, u) = parse_potential_csv(&text)?;
                Ok(PotentialSpec { family: Family::Tabulated { x, u }, coupling: self.coupling })
            }
            _ => Ok(self.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !self.coupling.is_finite() {
            return bad(format!("coupling {} is not finite", self.coupling));
        }
        let check_soliton = |s: &Soliton| -> Result<()> {
            if !(s.nu.is_finite() && s.nu > 0.0) || !s.center.is_finite() {
                return Err(Error::Parameter(format!("soliton needs nu > 0 and finite center, got {s:?}")));
            }
            Ok(())
        };
        match &self.family {
            Family::Soliton(s) => check_soliton(s),
            Family::MultiSoliton { solitons } => solitons.iter().try_for_each(check_soliton),
            Family::Gaussian { amplitude, width } | Family::Sech2 { amplitude, width } => {
                if !amplitude.is_finite() || !(width.is_finite() && *width > 0.0) {
                    return bad(format!("need finite amplitude and width > 0, got a={amplitude}, w={width}"));
                }
                Ok(())
            }
            Family::FromFile { .. } => Ok(()),
            Family::Tabulated { x, u } => validate_table(x, u),
        }
    }

    /// Pointwise value including the coupling.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = match &self.family {
            Family::Soliton(s) => s.eval(x),
            Family::MultiSoliton { solitons } => solitons.iter().map(|s| s.eval(x)).sum(),
            Family::Gaussian { amplitude, width } => amplitude * (-0.5 * (x / width).powi(2)).exp(),
            Family::Sech2 { amplitude, width } => amplitude / (x / width).cosh().powi(2),
            Family::FromFile { .. } => return self.load()?.eval(x),
            Family::Tabulated { x: xs, u } => interpolate(xs, u, x),
        };
        Ok(self.coupling * v)
    }

    pub fn sample(&self, grid: &PhysicalGrid) -> Result<Vec<f64>> {
        self.validate()?;
        grid.validate()?;
        let spec = self.load()?;
        let out: Vec<f64> = grid.points().iter().map(|&x| spec.eval(x)).collect::<Result<_>>()?;
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite potential sample at index {i}")));
        }
        Ok(out)
    }

    pub fn has_exact_transform(&self) -> bool {
        !matches!(self.family, Family::FromFile { .. } | Family::Tabulated { .. })
    }

    /// Closed-form transform u^(xi) = int e^{-ix xi} u(x) dx, including the coupling.
    pub fn fourier_exact(&self, xi: f64) -> Result<Complex64> {
        let v = match &self.family {
            Family::Soliton(s) => s.transform(xi),
            Family::MultiSoliton { solitons } => solitons.iter().map(|s| s.transform(xi)).sum(),
            Family::Gaussian { amplitude, width } => {
                Complex64::new(amplitude * width * (2.0 * PI).sqrt() * (-0.5 * (width * xi).powi(2)).exp(), 0.0)
            }
            Family::Sech2 { amplitude, width } => {
                let k = width * xi;
                let r = if k.abs() < 1e-8 { 2.0 } else { PI * k / (0.5 * PI * k).sinh() };
                Complex64::new(amplitude * width * r, 0.0)
            }
            Family::FromFile { .. } | Family::Tabulated { .. } => {
                return Err(Error::Capability("no closed-form transform for sampled potentials".into()))
            }
        };
        Ok(v * self.coupling)
    }

    /// Rate xi at which u^ decays (u^ ~ e^{-xi/scale}), used to size frequency grids.
    pub fn frequency_scale(&self) -> Result<f64> {
        Ok(match &self.family {
            Family::Soliton(s) => s.nu,
            Family::MultiSoliton { solitons } => solitons.iter().map(|s| s.nu).fold(0.0, f64::max),
            Family::Gaussian { width, .. } => 1.0 / width,
            Family::Sech2 { width, .. } => 2.0 / (PI * width),
            Family::FromFile { .. } => return self.load()?.frequency_scale(),
            Family::Tabulated { .. } => {
                let grid = self.sampling_grid()?;
                let u = self.sample(&grid)?;
                let spec = crate::fourier::fourier_forward(&grid, &crate::grid::real_field(&u))?;
                let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
                if peak == 0.0 {
                    return Ok(0.0);
                }
                let xi = crate::fourier::frequencies(&grid);
                let cutoff = spec
                    .iter()
                    .zip(&xi)
                    .filter(|(v, _)| v.norm() > 1e-12 * peak)
                    .map(|(_, k)| k.abs())
                    .fold(0.0, f64::max);
                cutoff / 16.0
            }
        })
    }

    /// Uniform grid used when a sampled potential must be transformed numerically.
    pub fn sampling_grid(&self) -> Result<PhysicalGrid> {
        match &self.family {
            Family::FromFile { .. } => self.load()?.sampling_grid(),
            Family::Tabulated { x, .. } => {
                let (lo, hi) = (x[0], x[x.len() - 1]);
                let step = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                let mut n = 2usize;
                while (hi - lo) / (n as f64) > step * (1.0 + 1e-9) && n < 1 << 16 {
                    n *= 2;
                }
                // Pad by one step so the last sample lies inside the half-open window.
                PhysicalGrid::new(n, lo, hi + (hi - lo) / (n as f64 - 1.0).max(1.0))
                    .or_else(|_| PhysicalGrid::new(n, lo, hi + step))
            }
            _ => Ok(PhysicalGrid::default()),
        }
    }

    /// u^(m*step) for m = 0..count, exact where available; otherwise a Riemann
    /// sum on the sampling grid, taken as zero beyond its Nyquist frequency.
    pub fn transform_at_multiples(&self, step: f64, count: usize) -> Result<Vec<Complex64>> {
        self.transform_at_progression(0.0, step, count)
    }

    /// u^(start + m*step) for m = 0..count, with the same conventions as
    /// [`Self::transform_at_multiples`].
    pub fn transform_at_progression(&self, start: f64, step: f64, count: usize) -> Result<Vec<Complex64>> {
        self.validate()?;
        if self.has_exact_transform() {
            return (0..count).map(|m| self.fourier_exact(start + m as f64 * step)).collect();
        }
        let spec = self.load()?;
        let grid = spec.sampling_grid()?;
        let u = spec.sample(&grid)?;
        let nyquist = PI / grid.spacing();
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        let inside: Vec<usize> = (0..count).filter(|&m| (start + m as f64 * step).abs() <= nyquist).collect();
        if let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) {
            let vals = fourier_at_progression(&grid, &u, start + lo as f64 * step, step, hi - lo + 1);
            out[lo..=hi].copy_from_slice(&vals);
        }
        Ok(out)
    }

    /// The potential s u(s x), whose Lax spectrum is s times that of u.
    pub fn rescaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Parameter(format!("scale factor {s} must be positive")));
        }
        let scale = |sol: &Soliton| Soliton { nu: sol.nu * s, center: sol.center / s };
        let family = match &self.load()?.family {
            Family::Soliton(sol) => Family::Soliton(scale(sol)),
            Family::MultiSoliton { solitons } => Family::MultiSoliton { solitons: solitons.iter().map(scale).collect() },
            Family::Gaussian { amplitude, width } => Family::Gaussian { amplitude: amplitude * s, width: width / s },
            Family::Sech2 { amplitude, width } => Family::Sech2 { amplitude: amplitude * s, width: width / s },
            Family::Tabulated { x, u } => Family::Tabulated {
                x: x.iter().map(|v| v / s).collect(),
                u: u.iter().map(|v| v * s).collect(),
            },
            Family::FromFile { .. } => unreachable!("load resolves files"),
        };
        Ok(PotentialSpec { family, coupling: self.coupling })
    }

    /// sup |u|, including the coupling.
    pub fn sup_norm(&self) -> Result<f64> {
        let spec = self.load()?;
        let grid = match spec.family {
            Family::Tabulated { ref u, .. } => return Ok(self.coupling.abs() * u.iter().map(|v| v.abs()).fold(0.0, f64::max)),
            _ => PhysicalGrid::default(),
        };
        Ok(spec.norms(&grid)?.linf)
    }

    pub fn norms(&self, grid: &PhysicalGrid) -> Result<PotentialNorms> {
        self.validate()?;
        let spec = self.load()?;
        let mut warnings = Vec::new();
        let (l1, l2, xl2, linf, inside) = match &spec.family {
            Family::Tabulated { .. } => {
                let u = spec.sample(grid)?;
                let h = grid.spacing();
                let xs = grid.points();
                let l1: f64 = u.iter().map(|v| v.abs()).sum::<f64>() * h;
                let l2: f64 = (u.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
                let xl2: f64 = (u.iter().zip(&xs).map(|(v, x)| (v * x).powi(2)).sum::<f64>() * h).sqrt();
                let linf = u.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let (first, last) = (u[0].abs(), u[u.len() - 1].abs());
                if linf > 0.0 && first.max(last) > 1e-3 * linf {
                    warnings.push("sampled potential does not decay at the window edges".into());
                }
                if let Family::Tabulated { x, u: tu } = &spec.family {
                    let edge = tu[0].abs().max(tu[tu.len() - 1].abs());
                    if linf > 0.0 && edge > 1e-3 * linf {
                        warnings.push(format!("tabulated data ends at |u| = {edge:.3e}; xu(x) may not be square integrable"));
                    }
                    if x[0] < grid.x_min || x[x.len() - 1] > grid.x_max {
                        warnings.push("tabulated data extends beyond the physical window".into());
                    }
                }
                (l1, l2, xl2, linf, l1)
            }
            _ => {
                let f = |x: f64| spec.eval(x).unwrap_or(0.0);
                let whole = |g: &dyn Fn(f64) -> f64| whole_line(g, &spec);
                let l1 = whole(&|x| f(x).abs());
                let l2 = whole(&|x| f(x).powi(2)).sqrt();
                let xl2 = whole(&|x| (x * f(x)).powi(2)).sqrt();
                let mut linf = grid.points().iter().map(|&x| f(x).abs()).fold(0.0, f64::max);
                for c in centres(&spec) {
                    linf = linf.max(f(c).abs());
                }
                let inside = window_integral(&|x| f(x).abs(), grid);
                (l1, l2, xl2, linf, inside)
            }
        };
        let window_tail = if l1 > 0.0 { ((l1 - inside) / l1).max(0.0) } else { 0.0 };
        if window_tail > 1e-6 {
            warnings.push(format!("window misses {window_tail:.2e} of the L1 mass"));
        }
        if !xl2.is_finite() {
            warnings.push("||x u||_2 diverges".into());
        }
        Ok(PotentialNorms { l1, l2, linf, xl2, window_tail, warnings })
    }
}

fn centres(spec: &PotentialSpec) -> Vec<f64> {
    match &spec.family {
        Family::Soliton(s) => vec![s.center],
        Family::MultiSoliton { solitons } => solitons.iter().map(|s| s.center).collect(),
        _ => vec![0.0],
    }
}

/// Integral over the real line through x = c + tan(theta), split at every centre.
fn whole_line(g: &dyn Fn(f64) -> f64, spec: &PotentialSpec) -> f64 {
    let mut cs = centres(spec);
    if cs.is_empty() {
        return 0.0;
    }
    cs.sort_by(|a, b| a.total_cmp(b));
    let mapped = |c: f64, th: f64| {
        let x = c + th.tan();
        g(x) / th.cos().powi(2)
    };
    let half = 0.5 * PI;
    let mut total = integrate_real(|t| mapped(cs[0], t), -half, 0.0, 1e-13, 1e-13);
    for w in cs.windows(2) {
        total += integrate_real(g, w[0], w[1], 1e-13, 1e-13);
    }
    total + integrate_real(|t| mapped(cs[cs.len() - 1], t), 0.0, half, 1e-13, 1e-13)
}

fn window_integral(g: &dyn Fn(f64) -> f64, grid: &PhysicalGrid) -> f64 {
    let mut total = 0.0;
    let pieces = 64;
    let w = grid.length() / pieces as f64;
    for k in 0..pieces {
        let a = grid.x_min + k as f64 * w;
        total += integrate_real(g, a, a + w, 1e-14, 1e-13);
    }
    total
}

fn validate_table(x: &[f64], u: &[f64]) -> Result<()> {
    if x.len() != u.len() {
        return Err(Error::Ingestion(format!("{} abscissae but {} values", x.len(), u.len())));
    }
    if x.len() < 2 {
        return Err(Error::Ingestion("need at least two samples".into()));
    }
    if let Some(i) = x.iter().chain(u).position(|v| !v.is_finite()) {
        return Err(Error::Ingestion(format!("non-finite entry at position {i}")));
    }
    if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Ingestion(format!("x not strictly increasing at row {}", i + 1)));
    }
    Ok(())
}

fn interpolate(xs: &[f64], u: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return 0.0;
    }
    let k = xs.partition_point(|&v| v <= x);
    if k == n {
        return u[n - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    u[k - 1] * (1.0 - t) + u[k] * t
}

/// Parses two-column `x,u` CSV text. Blank lines and `#` comments are ignored,
/// as is a leading non-numeric header row.
pub fn parse_potential_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut x = Vec::new();
    let mut u = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Ingestion(format!("row {}: {e}", row + 1)))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Ingestion(format!("row {}: expected 2 columns, found {}", row + 1, rec.len())));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                u.push(b);
            }
            _ if x.is_empty() && row == 0 => continue,
            _ => return Err(Error::Ingestion(format!("row {}: unparseable number", row + 1))),
        }
    }
    validate_table(&x, &u)?;
    Ok((x, u))
}

/// Pointwise max(u, 0).
pub fn positive_part(samples: &[f64]) -> Vec<f64> {
    samples.iter().map(|&v| v.max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{fourier_forward, frequencies};
    use crate::grid::real_field;
    use proptest::prelude::*;

    #[test]
    fn point_values() {
        assert_eq!(PotentialSpec::soliton(1.0, 0.0).eval(0.0).unwrap(), 2.0);
        assert_eq!(PotentialSpec::gaussian(1.0, 1.0).eval(0.0).unwrap(), 1.0);
        let m = PotentialSpec::multi_soliton(&[(1.0, -20.0), (2.0, 20.0)]);
        let direct = 2.0 + 4.0 / (1.0 + 4.0 * 1600.0);
        assert!((m.eval(-20.0).unwrap() - direct).abs() < 1e-12);
        assert!((m.eval(-20.0).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn exact_transforms() {
        let s = PotentialSpec::soliton(1.0, 0.0);
        // int 2/(1+x^2) dx = 2 [arctan]_{-inf}^{inf} = 2 pi
        assert!((s.fourier_exact(0.0).unwrap().re - 2.0 * PI).abs() < 1e-14);
        // Contour oracle: close in the lower half plane around the pole x = -i for xi > 0.
        assert!((s.fourier_exact(1.0).unwrap() - 2.0 * PI * (-1.0f64).exp()).norm() < 1e-14);
        let g = PotentialSpec::gaussian(1.0, 1.0);
        assert!((g.fourier_exact(0.0).unwrap().re - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!(matches!(
            PotentialSpec::tabulated(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap().fourier_exact(0.0),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn transforms_hermitian() {
        for spec in [
            PotentialSpec::soliton(0.7, 3.0),
            PotentialSpec::multi_soliton(&[(1.0, -30.0), (2.0, 30.0)]),
            PotentialSpec::gaussian(1.0, 2.0),
            PotentialSpec::sech2(1.5, 0.8),
        ] {
            for xi in [0.1, 1.0, 3.3] {
                let a = spec.fourier_exact(-xi).unwrap();
                let b = spec.fourier_exact(xi).unwrap().conj();
                assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
            }
        }
    }

    // Transform of the window-truncated soliton. Write 2/(1+x^2) = -i [1/(x-i) - 1/(x+i)];
    // for a pole a the two tails are
    //   int_X^inf e^{-ix xi}/(x-a) dx = e^{-ia xi} E1(i xi (X-a)),
    //   int_{-inf}^Y e^{-ix xi}/(x-a) dx = -e^{-ia xi} E1(-i xi (a-Y)),
    // and the whole-line transform is 2 pi e^{-|xi|}.
    fn truncated_soliton_transform(xi: f64, lo: f64, hi: f64) -> Complex64 {
        use crate::special::exp_integral_e1;
        let i = Complex64::new(0.0, 1.0);
        let tails = |a: Complex64| {
            let right = (-i * a * xi).exp() * exp_integral_e1(i * xi * (hi - a)).unwrap();
            let left = -(-i * a * xi).exp() * exp_integral_e1(-i * xi * (a - lo)).unwrap();
            right + left
        };
        Complex64::new(2.0 * PI * (-xi.abs()).exp(), 0.0) + i * (tails(i) - tails(-i))
    }

    #[test]
    fn sampled_transform_matches_truncated_exact() {
        let grid = PhysicalGrid::default();
        let spec = PotentialSpec::soliton(1.0, 0.0);
        let u = spec.sample(&grid).unwrap();
        let fh = fourier_forward(&grid, &real_field(&u)).unwrap();
        // At the FFT bins the phases at both window ends coincide, so for an even
        // potential the rectangle rule agrees with the trapezoid rule and its
        // Euler-Maclaurin end corrections are far below the tolerance.
        for (v, xi) in fh.iter().zip(frequencies(&grid)) {
            if xi.abs() > 20.0 || xi == 0.0 {
                continue;
            }
            let exact = truncated_soliton_transform(xi, grid.x_min, grid.x_max);
            assert!((v - exact).norm() < 1e-8, "xi={xi} err={}", (v - exact).norm());
        }
        let whole = 2.0 * PI;
        let inside = 4.0 * (grid.x_max).atan();
        assert!((fh[0].re - inside).abs() < 1e-8 && (whole - inside) > 1e-3);
    }

    #[test]
    fn sampled_gaussian_matches_exact() {
        let grid = PhysicalGrid::default();
        for spec in [PotentialSpec::gaussian(1.0, 2.0), PotentialSpec::sech2(1.0, 1.5)] {
            let u = spec.sample(&grid).unwrap();
            let fh = fourier_forward(&grid, &real_field(&u)).unwrap();
            for (v, xi) in fh.iter().zip(frequencies(&grid)) {
                if xi.abs() <= 20.0 {
                    assert!((v - spec.fourier_exact(xi).unwrap()).norm() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn soliton_norms() {
        let n = PotentialSpec::soliton(1.0, 0.0).norms(&PhysicalGrid::default()).unwrap();
        assert_eq!(n.linf, 2.0);
        assert!((n.l1 - 2.0 * PI).abs() < 1e-6);
        // int 4/(1+x^2)^2 dx = 2 pi
        assert!((n.l2 * n.l2 - 2.0 * PI).abs() < 1e-6);
        // int 4x^2/(1+x^2)^2 dx = 2 pi
        assert!((n.xl2 * n.xl2 - 2.0 * PI).abs() < 1e-6);
        assert!(n.window_tail > 1e-6 && !n.warnings.is_empty());
        let z = PotentialSpec::zero().norms(&PhysicalGrid::default()).unwrap();
        assert_eq!((z.l1, z.l2, z.linf, z.xl2), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn norms_scale_with_coupling_and_width() {
        let g = PhysicalGrid::default();
        let a = PotentialSpec::soliton(1.0, 0.0).norms(&g).unwrap();
        let b = PotentialSpec::soliton(1.0, 0.0).with_coupling(0.5).norms(&g).unwrap();
        for (x, y) in [(a.l1, b.l1), (a.l2, b.l2), (a.linf, b.linf), (a.xl2, b.xl2)] {
            assert!((0.5 * x - y).abs() < 1e-10 * x);
        }
        // u_s(x) = s u(sx) maps nu -> s nu.
        let s = PotentialSpec::soliton(2.0, 0.0).norms(&g).unwrap();
        assert!((s.linf - 2.0 * a.linf).abs() < 1e-12);
        assert!((s.l1 - a.l1).abs() < 1e-8);
    }

    #[test]
    fn positive_part_cases() {
        let g = PhysicalGrid::new(1024, -50.0, 50.0).unwrap();
        let s = PotentialSpec::soliton(1.0, 0.0).sample(&g).unwrap();
        assert_eq!(positive_part(&s), s);
        let neg: Vec<f64> = PotentialSpec::gaussian(-1.0, 1.0).sample(&g).unwrap();
        assert!(positive_part(&neg).iter().all(|&v| v == 0.0));
        let dip = PotentialSpec::soliton(1.0, 10.0).sample(&g).unwrap();
        let mixed: Vec<f64> = s.iter().zip(&dip).map(|(a, b)| a - b).collect();
        let p = positive_part(&mixed);
        for (k, x) in g.points().iter().enumerate() {
            let direct = 2.0 / (1.0 + x * x) - 2.0 / (1.0 + (x - 10.0).powi(2));
            assert!((p[k] - direct.max(0.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_parsing() {
        let (x, u) = parse_potential_csv("x,u\n# comment\n-1, 0\n0, 1.5\n\n1,0\n").unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        assert_eq!(u, vec![0.0, 1.5, 0.0]);
        assert!(parse_potential_csv("0,1\n0,2\n").is_err());
        assert!(parse_potential_csv("0,1,2\n1,2,3\n").is_err());
        assert!(parse_potential_csv("0,nan\n1,2\n").is_err());
        assert!(parse_potential_csv("").is_err());
        assert!(parse_potential_csv("0,1\nfoo,2\n").is_err());
    }

    #[test]
    fn file_ingestion_and_interpolation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(&path, "x,u\n-1,0\n0,2\n1,0\n").unwrap();
        let spec = PotentialSpec { family: Family::FromFile { path: path.clone() }, coupling: 1.0 };
        let g = PhysicalGrid::new(8, -2.0, 2.0).unwrap();
        let u = spec.sample(&g).unwrap();
        assert_eq!(u, vec![0.0, 0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0]);
        let missing = PotentialSpec { family: Family::FromFile { path: dir.path().join("nope.csv") }, coupling: 1.0 };
        assert!(matches!(missing.sample(&g), Err(Error::Ingestion(_))));
    }

    #[test]
    fn invalid_specs() {
        assert!(PotentialSpec::soliton(0.0, 0.0).validate().is_err());
        assert!(PotentialSpec::gaussian(1.0, -1.0).validate().is_err());
        assert!(PotentialSpec::soliton(1.0, 0.0).with_coupling(f64::NAN).validate().is_err());
    }

    #[test]
    fn serde_round_trip() {
        for spec in [
            PotentialSpec::soliton(1.0, 2.0).with_coupling(0.3),
            PotentialSpec::multi_soliton(&[(1.0, -30.0), (2.0, 30.0)]),
            PotentialSpec::gaussian(1.0, 2.0),
        ] {
            let s = serde_json::to_string(&spec).unwrap();
            let back: PotentialSpec = serde_json::from_str(&s).unwrap();
            assert_eq!(back, spec);
        }
        let parsed: PotentialSpec = serde_json::from_str(r#"{"family":"soliton","nu":2}"#).unwrap();
        assert_eq!(parsed, PotentialSpec::soliton(2.0, 0.0));
    }

    #[test]
    fn sampled_transform_beyond_nyquist_is_zero() {
        let g = PhysicalGrid::new(512, -50.0, 50.0).unwrap();
        let spec = PotentialSpec::from_samples(&g, &PotentialSpec::gaussian(1.0, 1.0).sample(&g).unwrap()).unwrap();
        let v = spec.transform_at_multiples(0.5, 200).unwrap();
        for (m, z) in v.iter().enumerate() {
            let xi = 0.5 * m as f64;
            if xi < 8.0 {
                assert!((z.re - (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp()).abs() < 1e-10);
            }
            if xi >= PI / g.spacing() + 0.5 {
                assert_eq!(*z, Complex64::new(0.0, 0.0));
            }
        }
    }

    proptest! {
        #[test]
        fn sampling_is_real_and_linear_in_coupling(nu in 0.2f64..3.0, c in -2.0f64..2.0, x0 in -10.0f64..10.0) {
            let g = PhysicalGrid::new(256, -40.0, 40.0).unwrap();
            let a = PotentialSpec::soliton(nu, x0).sample(&g).unwrap();
            let b = PotentialSpec::soliton(nu, x0).with_coupling(c).sample(&g).unwrap();
            prop_assert!(a.iter().zip(&b).all(|(p, q)| (c * p - q).abs() <= 1e-14 * p.abs().max(1.0)));
        }
    }
}
