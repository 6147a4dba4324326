//! Pseudospectral Benjamin-Ono flow u_t + 2 u u_x - H u_xx = 0 on a periodic
//! window, with an isospectrality harness.
//!
//! In Fourier variables u^_t = i xi |xi| u^ - i xi (u^2)^. The linear part is
//! integrated exactly by an integrating factor and the quadratic term by
//! classical RK4. Only the xi >= 0 half of the spectrum is stored, so the
//! field stays real by construction.

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, PhysicalGrid};
use crate::lax::discrete::discrete_spectrum;
use crate::lax::matrix::default_grid;
use crate::potentials::PotentialSpec;
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

/// Imaginary-axis stability bound of classical RK4.
pub const RK4_STABILITY: f64 = 2.0 * SQRT_2;

/// Edge values above this fraction of sup |u0| make the periodic window unfaithful.
pub const EDGE_DECAY: f64 = 1e-4;

/// Blow-up threshold on sup |u| relative to sup |u0|.
pub const BLOW_UP: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub half_length: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Time steps between snapshots.
    pub snapshot_stride: usize,
    pub dealias: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig { half_length: 200.0, n_modes: 4096, dt: 1e-3, t_final: 1.0, snapshot_stride: 1000, dealias: true }
    }
}

impl EvolutionConfig {
    pub fn grid(&self) -> Result<PhysicalGrid> {
        if !(self.half_length.is_finite() && self.half_length > 0.0) {
            return Err(Error::Parameter(format!("half_length = {} must be positive", self.half_length)));
        }
        if self.n_modes < 8 {
            return Err(Error::Parameter(format!("n_modes = {} is too small", self.n_modes)));
        }
        PhysicalGrid::symmetric(self.n_modes, self.half_length)
    }

    /// Number of time steps, checked to land on t_final and on a snapshot.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Parameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Parameter(format!("t_final = {} must be non-negative", self.t_final)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::Parameter("snapshot_stride must be positive".into()));
        }
        let steps = (self.t_final / self.dt).round();
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(Error::Parameter(format!("dt = {} does not divide t_final = {}", self.dt, self.t_final)));
        }
        let steps = steps as usize;
        if !steps.is_multiple_of(self.snapshot_stride) {
            return Err(Error::Parameter(format!(
                "snapshot stride {} does not divide the {steps} steps to t_final",
                self.snapshot_stride
            )));
        }
        Ok(steps)
    }

    /// Largest wavenumber the quadratic term feeds.
    pub fn effective_wavenumber(&self) -> Result<f64> {
        let nyquist = PI / self.grid()?.spacing();
        Ok(if self.dealias { nyquist * 2.0 / 3.0 } else { nyquist })
    }

    /// dt xi^2 and dt xi 2 sup|u0| against the RK4 stability bound.
    pub fn check_cfl(&self, sup: f64) -> Result<()> {
        let xi = self.effective_wavenumber()?;
        let dispersive = self.dt * xi * xi;
        let advective = self.dt * xi * 2.0 * sup;
        if dispersive > RK4_STABILITY || advective > RK4_STABILITY {
            return Err(Error::Parameter(format!(
                "CFL violated: dt xi^2 = {dispersive:.3}, dt xi 2 sup|u| = {advective:.3}, bound {RK4_STABILITY:.3}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub t: f64,
    /// int u
    pub mass: f64,
    /// int u^2
    pub energy: f64,
    /// max |Im u| of the full complex inverse transform.
    pub max_imag: f64,
    pub sup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: PhysicalGrid,
    pub config: EvolutionConfig,
    pub snapshots: Vec<Snapshot>,
    pub conserved: Vec<Conserved>,
}

impl Trajectory {
    /// Max relative drift of (int u, int u^2) from t = 0; absolute where the initial value is zero.
    pub fn conservation_drift(&self) -> (f64, f64) {
        let first = self.conserved[0];
        let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
        self.conserved.iter().fold((0.0, 0.0), |(m, e), c| {
            (f64::max(m, rel(c.mass, first.mass)), f64::max(e, rel(c.energy, first.energy)))
        })
    }

    pub fn max_imag(&self) -> f64 {
        self.conserved.iter().map(|c| c.max_imag).fold(0.0, f64::max)
    }

    /// Position of the global maximum at each snapshot.
    pub fn peak_track(&self) -> Vec<(f64, f64)> {
        self.snapshots.iter().map(|s| (s.t, peak_position(&self.grid, &s.u))).collect()
    }
}

struct Stepper {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    g: Vec<Complex64>,
    real: Vec<f64>,
    spec: Vec<Complex64>,
    scratch_r: Vec<Complex64>,
    scratch_c: Vec<Complex64>,
}

impl Stepper {
    fn new(grid: &PhysicalGrid, dt: f64, dealias: bool) -> Self {
        let n = grid.n_points;
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(n);
        let c2r = planner.plan_fft_inverse(n);
        let dk = 2.0 * PI / grid.length();
        let cut = (n / 2) as f64 * 2.0 / 3.0;
        let half = n / 2 + 1;
        let mut e = Vec::with_capacity(half);
        let mut g = Vec::with_capacity(half);
        for k in 0..half {
            // The Nyquist mode has no real-valued derivative; it is held at zero.
            let nyquist = k == n / 2;
            let xi = k as f64 * dk;
            let lin = if nyquist { 0.0 } else { xi * xi };
            e.push(Complex64::from_polar(1.0, 0.5 * dt * lin));
            let keep = !nyquist && (!dealias || (k as f64) <= cut);
            g.push(if keep { Complex64::new(0.0, -xi * dt) } else { Complex64::new(0.0, 0.0) });
        }
        let e2 = e.iter().map(|v| v * v).collect();
        let scratch_r = r2c.make_scratch_vec();
        let scratch_c = c2r.make_scratch_vec();
        Stepper { n, e, e2, g, real: vec![0.0; n], spec: vec![Complex64::new(0.0, 0.0); half], r2c, c2r, scratch_r, scratch_c }
    }

    fn forward(&mut self, u: &[f64]) -> Vec<Complex64> {
        self.real.copy_from_slice(u);
        let mut out = self.r2c.make_output_vec();
        self.r2c.process_with_scratch(&mut self.real, &mut out, &mut self.scratch_r).expect("sizes match");
        out
    }

    fn inverse(&mut self, v: &[Complex64]) -> Vec<f64> {
        self.spec.copy_from_slice(v);
        self.spec[0].im = 0.0;
        self.spec[self.n / 2] = Complex64::new(0.0, 0.0);
        let mut out = vec![0.0; self.n];
        self.c2r.process_with_scratch(&mut self.spec, &mut out, &mut self.scratch_c).expect("sizes match");
        let s = 1.0 / self.n as f64;
        out.iter_mut().for_each(|x| *x *= s);
        out
    }

    /// g (u^2)^ for the field with coefficients v, and sup |u|.
    fn nonlinear(&mut self, v: &[Complex64]) -> (Vec<Complex64>, f64) {
        let u = self.inverse(v);
        let sup = u.iter().fold(0.0f64, |m, x| if x.is_finite() { m.max(x.abs()) } else { f64::NAN });
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let mut w = self.forward(&sq);
        w.iter_mut().zip(&self.g).for_each(|(a, b)| *a *= b);
        (w, sup)
    }

    /// One integrating-factor RK4 step; returns sup |u| at the start of the step.
    fn step(&mut self, v: &mut [Complex64]) -> f64 {
        let (a, sup) = self.nonlinear(v);
        let tmp: Vec<Complex64> = (0..v.len()).map(|k| self.e[k] * (v[k] + 0.5 * a[k])).collect();
        let (b, _) = self.nonlinear(&tmp);
        let tmp: Vec<Complex64> = (0..v.len()).map(|k| self.e[k] * v[k] + 0.5 * b[k]).collect();
        let (c, _) = self.nonlinear(&tmp);
        let tmp: Vec<Complex64> = (0..v.len()).map(|k| self.e2[k] * v[k] + self.e[k] * c[k]).collect();
        let (d, _) = self.nonlinear(&tmp);
        for k in 0..v.len() {
            v[k] = self.e2[k] * v[k] + (self.e2[k] * a[k] + 2.0 * self.e[k] * (b[k] + c[k]) + d[k]) / 6.0;
        }
        sup
    }
}

fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// max |Im| of the inverse transform of the Hermitian extension of the half spectrum.
fn imaginary_leak(v: &[Complex64], n: usize) -> f64 {
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..=n / 2 {
        full[k] = v[k];
        if k > 0 && k < n / 2 {
            full[n - k] = v[k].conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut full);
    full.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / n as f64
}

fn record(grid: &PhysicalGrid, t: f64, u: &[f64], v: &[Complex64]) -> Conserved {
    let h = grid.spacing();
    Conserved {
        t,
        mass: h * u.iter().sum::<f64>(),
        energy: h * u.iter().map(|x| x * x).sum::<f64>(),
        max_imag: imaginary_leak(v, grid.n_points),
        sup: sup_norm(u),
    }
}

fn check_edges(grid: &PhysicalGrid, u: &[f64]) -> Result<()> {
    let sup = sup_norm(u);
    let edge = u[0].abs().max(u[u.len() - 1].abs());
    if edge > EDGE_DECAY * sup {
        return Err(Error::Precondition(format!(
            "initial data is {edge:.3e} at the edge of [{}, {}], above {EDGE_DECAY:e} sup|u0|; enlarge the window",
            grid.x_min, grid.x_max
        )));
    }
    Ok(())
}

/// Evolves samples of u0 on the config grid.
pub fn evolve_samples(u0: &[f64], config: &EvolutionConfig) -> Result<Trajectory> {
    let grid = config.grid()?;
    if u0.len() != grid.n_points {
        return Err(Error::Parameter(format!("{} samples for a {}-point grid", u0.len(), grid.n_points)));
    }
    if let Some(i) = u0.iter().position(|x| !x.is_finite()) {
        return Err(Error::Parameter(format!("non-finite initial sample at index {i}")));
    }
    let steps = config.steps()?;
    let sup0 = sup_norm(u0);
    config.check_cfl(sup0)?;
    check_edges(&grid, u0)?;
    let (snapshots, conserved) = run(&grid, u0, config.dt, steps, config.snapshot_stride, config.dealias, sup0)?;
    Ok(Trajectory { grid, config: config.clone(), snapshots, conserved })
}

pub fn evolve(u0: &PotentialSpec, config: &EvolutionConfig) -> Result<Trajectory> {
    let grid = config.grid()?;
    evolve_samples(&u0.sample(&grid)?, config)
}

fn run(
    grid: &PhysicalGrid,
    u0: &[f64],
    dt: f64,
    steps: usize,
    stride: usize,
    dealias: bool,
    sup0: f64,
) -> Result<(Vec<Snapshot>, Vec<Conserved>)> {
    let mut stepper = Stepper::new(grid, dt, dealias);
    let mut v = stepper.forward(u0);
    let mut snapshots = vec![Snapshot { t: 0.0, u: u0.to_vec() }];
    let mut conserved = vec![record(grid, 0.0, u0, &v)];
    for s in 1..=steps {
        let sup = stepper.step(&mut v);
        if !sup.is_finite() || sup > BLOW_UP * sup0.max(f64::MIN_POSITIVE) && sup0 > 0.0 {
            return Err(Error::Instability(format!(
                "sup|u| = {sup:.3e} after {} steps exceeds {BLOW_UP} sup|u0| = {:.3e}",
                s - 1,
                BLOW_UP * sup0
            )));
        }
        if s % stride == 0 {
            let t = s as f64 * dt;
            let u = stepper.inverse(&v);
            if u.iter().any(|x| !x.is_finite()) || sup_norm(&u) > BLOW_UP * sup0 && sup0 > 0.0 {
                return Err(Error::Instability(format!("sup|u| = {:.3e} at t = {t}", sup_norm(&u))));
            }
            conserved.push(record(grid, t, &u, &v));
            snapshots.push(Snapshot { t, u });
        }
    }
    Ok((snapshots, conserved))
}

/// Evolves to t_final and back with dt -> -dt; returns max |u(0) - u0|.
pub fn time_reversal_error(u0: &PotentialSpec, config: &EvolutionConfig) -> Result<f64> {
    let grid = config.grid()?;
    let u = u0.sample(&grid)?;
    let steps = config.steps()?;
    let sup0 = sup_norm(&u);
    config.check_cfl(sup0)?;
    check_edges(&grid, &u)?;
    let (fwd, _) = run(&grid, &u, config.dt, steps, steps.max(1), config.dealias, sup0)?;
    let end = &fwd[fwd.len() - 1].u;
    let (back, _) = run(&grid, end, -config.dt, steps, steps.max(1), config.dealias, sup0)?;
    Ok(back[back.len() - 1].u.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Location of the global maximum of the trigonometric interpolant of u.
pub fn peak_position(grid: &PhysicalGrid, u: &[f64]) -> f64 {
    let n = u.len();
    let Some((i0, _)) = u.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return f64::NAN;
    };
    let r2c = RealFftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = u.to_vec();
    let mut c = r2c.make_output_vec();
    r2c.process(&mut buf, &mut c).expect("sizes match");
    let dk = 2.0 * PI / grid.length();
    // u(x) = (1/n)(c0 + 2 Re sum_k c_k e^{i k dk (x - x_min)}), Nyquist dropped.
    let derivs = |x: f64| {
        let (mut d1, mut d2) = (0.0, 0.0);
        for (k, ck) in c.iter().enumerate().take(n / 2).skip(1) {
            let xi = k as f64 * dk;
            let w = ck * Complex64::from_polar(1.0, xi * (x - grid.x_min));
            d1 -= xi * w.im;
            d2 -= xi * xi * w.re;
        }
        (2.0 * d1 / n as f64, 2.0 * d2 / n as f64)
    };
    let h = grid.spacing();
    let mut x = grid.point(i0);
    for _ in 0..20 {
        let (d1, d2) = derivs(x);
        if d2 >= 0.0 {
            break;
        }
        let dx = (-d1 / d2).clamp(-h, h);
        x += dx;
        if dx.abs() < 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftBranch {
    pub lambda0: f64,
    /// max_t |lambda(t) - lambda(0)| / |lambda(0)|.
    pub max_relative_drift: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub grid: Option<FrequencyGrid>,
    pub times: Vec<f64>,
    /// Ascending discrete eigenvalues at each snapshot.
    pub eigenvalues: Vec<Vec<f64>>,
    pub branches: Vec<DriftBranch>,
    pub topology_warning: Option<String>,
}

impl DriftReport {
    pub fn max_drift(&self) -> f64 {
        self.branches.iter().map(|b| b.max_relative_drift).fold(0.0, f64::max)
    }
}

/// Discrete spectrum of L_u(t) at every snapshot, on one frequency grid
/// (the default grid of u0 when none is given).
pub fn isospectral_drift(trajectory: &Trajectory, grid: Option<FrequencyGrid>) -> Result<DriftReport> {
    let Some(first) = trajectory.snapshots.first() else {
        return Err(Error::Precondition("trajectory has no snapshots".into()));
    };
    if sup_norm(&first.u) == 0.0 {
        return Ok(DriftReport::default());
    }
    let spec0 = PotentialSpec::from_samples(&trajectory.grid, &first.u)?;
    let grid = match grid {
        Some(g) => g,
        None => default_grid(&spec0)?,
    };
    let mut report = DriftReport { grid: Some(grid), ..Default::default() };
    for snap in &trajectory.snapshots {
        let spec = PotentialSpec::from_samples(&trajectory.grid, &snap.u)?;
        report.times.push(snap.t);
        report.eigenvalues.push(discrete_spectrum(&spec, Some(grid))?.eigenvalues);
    }
    let initial = &report.eigenvalues[0];
    if initial.is_empty() {
        return Ok(report);
    }
    let counts: Vec<usize> = report.eigenvalues.iter().map(Vec::len).collect();
    if counts.iter().any(|&c| c != initial.len()) {
        report.topology_warning = Some(format!("branch count changes along the flow: {counts:?}"));
    }
    report.branches = initial
        .iter()
        .enumerate()
        .map(|(j, &l0)| {
            let drift = report
                .eigenvalues
                .iter()
                .map(|ev| ev.get(j).map_or(f64::INFINITY, |l| (l - l0).abs() / l0.abs()))
                .fold(0.0, f64::max);
            DriftBranch { lambda0: l0, max_relative_drift: drift }
        })
        .collect();
    Ok(report)
}
