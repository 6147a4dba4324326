//! Batch runner: parses a JSON run configuration, dispatches to the toolkit,
//! and writes `report.json`, CSV side files and two-column plot data.

use bo_scatter::evolve::{evolve, isospectral_drift, time_reversal_error, DriftReport, EvolutionConfig, Trajectory};
use bo_scatter::green::{assemble_k, bs_count, count_bound_scan, secular_solve, BsCount, CutoffSpec, ScanReport, SecularSolve};
use bo_scatter::grid::{FrequencyGrid, PhysicalGrid};
use bo_scatter::lax::{coupling_sweep, discrete_spectrum, scattering_for, CouplingBranch, DiscreteSpectrum, ScatteringData, ScatteringOptions};
use bo_scatter::potentials::{positive_part, Family, PotentialSpec};
use bo_scatter::verify::{
    default_corpus, resolvent_rows, scattering_rows, spectrum_rows, verify_suite, CheckRow, CorpusEntry, Relation,
    VerifyOptions, MONOTONE_TOL, SCAN_BAND, SCAN_GROWTH, SECULAR_TOL,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const DEFAULT_OUTDIR: &str = "bo-scatter-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Scattering,
    Bs,
    Secular,
    Sweep,
    Evolve,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    /// Grid for the Green-kernel operators and physical-space diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical_grid: Option<PhysicalGrid>,
    /// Coarse Lax grid; the default rule applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_grid: Option<FrequencyGrid>,
    /// Depths E > 0 for `bs` and `secular`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<f64>,
    /// Ascending positive couplings for `sweep`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    /// Corpus for `verify`; a single `potential` or the default corpus otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<Vec<CorpusEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<CutoffSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Module(#[from] bo_scatter::Error),
    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bo_scatter::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Module(
                E::Parameter(_) | E::Grid(_) | E::Ingestion(_) | E::Capability(_) | E::Precondition(_) | E::Domain(_) | E::Range(_),
            ) => EXIT_USAGE,
            CliError::Module(_) | CliError::Output(_) => EXIT_NUMERIC,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses a configuration document; errors carry the line and column.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| usage(format!("config line {} column {}: {e}", e.line(), e.column())))
}

/// Reads and validates a configuration file. Relative `from_file` paths are
/// resolved against the directory holding the configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut config = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |spec: &mut PotentialSpec| {
        if let Family::FromFile { path } = &mut spec.family {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    };
    if let Some(p) = config.potential.as_mut() {
        resolve(p);
    }
    for entry in config.corpus.iter_mut().flatten() {
        resolve(&mut entry.potential);
    }
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            potential: None,
            physical_grid: None,
            frequency_grid: None,
            energies: Vec::new(),
            couplings: Vec::new(),
            evolution: None,
            corpus: None,
            cutoff: None,
            lambda0: None,
            output_dir: None,
            seed: 0,
        }
    }

    pub fn with_potential(mut self, p: PotentialSpec) -> Self {
        self.potential = Some(p);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut potentials: Vec<(&str, &PotentialSpec)> = self.potential.iter().map(|p| ("potential", p)).collect();
        for entry in self.corpus.iter().flatten() {
            potentials.push((entry.name.as_str(), &entry.potential));
        }
        for (field, p) in &potentials {
            if let Family::FromFile { path } = &p.family {
                if !path.exists() {
                    return Err(usage(format!("{field}: file {} does not exist", path.display())));
                }
            }
            p.validate().map_err(|e| usage(format!("{field}: {e}")))?;
        }
        if self.command != Command::Verify && self.potential.is_none() {
            return Err(usage(format!("command {:?} needs a `potential` block", self.command)));
        }
        if let Some(g) = &self.physical_grid {
            g.validate().map_err(|e| usage(format!("physical_grid: {e}")))?;
        }
        if let Some(g) = &self.frequency_grid {
            FrequencyGrid::new(g.n_modes, g.xi_max).map_err(|e| usage(format!("frequency_grid: {e}")))?;
        }
        if let Some(e) = self.energies.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(usage(format!("energies: {e} is not a positive depth")));
        }
        if self.couplings.windows(2).any(|w| w[1] <= w[0]) || self.couplings.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(usage("couplings: must be positive, finite and strictly ascending"));
        }
        if let Some(c) = &self.cutoff {
            if !(c.plateau > 0.0 && c.support > c.plateau && c.support.is_finite()) {
                return Err(usage(format!("cutoff: need 0 < plateau < support, got {c:?}")));
            }
        }
        if let Some(l) = self.lambda0 {
            if !(l.is_finite() && l > 0.0) {
                return Err(usage(format!("lambda0: {l} must be positive")));
            }
        }
        if let Some(ev) = &self.evolution {
            ev.grid().map_err(|e| usage(format!("evolution: {e}")))?;
            ev.steps().map_err(|e| usage(format!("evolution: {e}")))?;
        }
        Ok(())
    }

    fn potential(&self) -> &PotentialSpec {
        self.potential.as_ref().expect("validated")
    }

    fn physical(&self) -> PhysicalGrid {
        self.physical_grid.unwrap_or_default()
    }

    fn cutoff_spec(&self) -> CutoffSpec {
        self.cutoff.unwrap_or_default()
    }

    /// The configuration with every default filled in, as echoed in the report.
    pub fn resolved(&self) -> RunConfig {
        let mut r = self.clone();
        r.output_dir = None;
        match self.command {
            Command::Bs => {
                r.physical_grid.get_or_insert_with(PhysicalGrid::default);
                if r.energies.is_empty() {
                    r.energies = vec![0.1, 0.25, 0.75];
                }
            }
            Command::Secular => {
                r.physical_grid.get_or_insert_with(PhysicalGrid::default);
                r.cutoff.get_or_insert_with(CutoffSpec::default);
                if r.energies.is_empty() {
                    r.energies = vec![1e-2, 1e-3, 1e-4];
                }
            }
            Command::Sweep => {
                if r.couplings.is_empty() {
                    r.couplings = (1..=10).map(|k| 0.2 * k as f64).collect();
                }
            }
            Command::Evolve => {
                r.evolution.get_or_insert_with(EvolutionConfig::default);
            }
            Command::Verify => {
                r.physical_grid.get_or_insert_with(PhysicalGrid::default);
            }
            Command::Spectrum | Command::Scattering => {}
        }
        r
    }
}

/// Everything written to `report.json`. Timings live in `timings.json` so that
/// identical configurations give byte-identical reports.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub config: RunConfig,
    pub result: serde_json::Value,
    pub checks: Vec<CheckRow>,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub stages: Vec<(String, f64)>,
}

/// A CSV file: name, header, rows.
pub type Table = (String, Vec<String>, Vec<Vec<String>>);

/// Side files produced by a command, relative to the output directory.
#[derive(Default)]
pub struct Artifacts {
    pub csv: Vec<Table>,
    pub plots: Vec<(String, Vec<(f64, f64)>)>,
}

impl Artifacts {
    fn table(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) {
        self.csv.push((name.into(), header.iter().map(|s| s.to_string()).collect(), rows));
    }

    fn plot(&mut self, name: &str, points: Vec<(f64, f64)>) {
        self.plots.push((name.into(), points));
    }
}

pub struct Run {
    pub report: RunReport,
    pub timings: Timings,
    pub artifacts: Artifacts,
}

impl Run {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))
}

pub fn run(config: &RunConfig) -> Result<Run> {
    config.validate()?;
    let start = Instant::now();
    let resolved = config.resolved();
    let mut artifacts = Artifacts::default();
    let mut timings = Timings::default();
    let (result, checks) = match config.command {
        Command::Spectrum => run_spectrum(&resolved, &mut artifacts)?,
        Command::Scattering => run_scattering(&resolved, &mut artifacts)?,
        Command::Bs => run_bs(&resolved, &mut artifacts)?,
        Command::Secular => run_secular(&resolved, &mut artifacts)?,
        Command::Sweep => run_sweep(&resolved, &mut artifacts)?,
        Command::Evolve => run_evolve(&resolved, &mut artifacts, &mut timings)?,
        Command::Verify => run_verify(&resolved, &mut artifacts)?,
    };
    timings.total_seconds = start.elapsed().as_secs_f64();
    let passed = checks.iter().all(CheckRow::passed);
    Ok(Run { report: RunReport { command: config.command, config: resolved, result, checks, passed }, timings, artifacts })
}

fn spectrum_table(a: &mut Artifacts, s: &DiscreteSpectrum) {
    let rows = s
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let coarse = s.coarse_eigenvalues.get(j).copied().unwrap_or(f64::NAN);
            let res = s.residuals.get(j).copied().unwrap_or(f64::NAN);
            vec![j.to_string(), num(*l), num(coarse), num(res)]
        })
        .collect();
    a.table("spectrum.csv", &["index", "lambda", "coarse_lambda", "residual"], rows);
    a.plot("spectrum.dat", s.eigenvalues.iter().enumerate().map(|(j, l)| (j as f64, *l)).collect());
}

fn stability_rows(s: &DiscreteSpectrum) -> Vec<CheckRow> {
    s.eigenvalues
        .iter()
        .zip(&s.coarse_eigenvalues)
        .map(|(f, c)| {
            CheckRow::measured("eigenvalue_stability", &format!("lambda={f:.6e}"), (f - c).abs(), Relation::AtMost, s.tol_stab_at(*f))
                .with_note("|fine - coarse| against tol_stab")
        })
        .collect()
}

fn run_spectrum(c: &RunConfig, a: &mut Artifacts) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let s = discrete_spectrum(c.potential(), c.frequency_grid)?;
    spectrum_table(a, &s);
    let mut checks = stability_rows(&s);
    checks.extend(spectrum_rows("potential", &s));
    Ok((json(&s)?, checks))
}

fn run_scattering(c: &RunConfig, a: &mut Artifacts) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let s = discrete_spectrum(c.potential(), c.frequency_grid)?;
    spectrum_table(a, &s);
    let mut checks = stability_rows(&s);
    checks.extend(spectrum_rows("potential", &s));
    let window = c.physical();
    let opts = ScatteringOptions { grid: c.frequency_grid, window, ..Default::default() };
    let data: ScatteringData = scattering_for(c.potential(), s, &opts)?;
    checks.extend(scattering_rows("potential", &data.records));
    let mut rows = Vec::new();
    for (j, r) in data.records.iter().enumerate() {
        let tail = r.tail.value();
        let phase = r.phase.value();
        rows.push(vec![
            j.to_string(),
            num(r.lambda),
            num(r.identity_error),
            num(r.normalization_error),
            r.integral_residual.value().map_or(String::new(), |v| num(*v)),
            tail.map_or(String::new(), |t| num(t.extrapolated.re)),
            tail.map_or(String::new(), |t| num(t.extrapolated.im)),
            phase.map_or(String::new(), |p| num(p.gamma.re)),
            phase.map_or(String::new(), |p| num(p.gamma.im)),
            phase.map_or(String::new(), |p| num(p.flatness)),
        ]);
        if let Some(phi) = &r.phi {
            let xs = window.points();
            let vals = phi.to_physical(&xs);
            a.table(
                &format!("eigenfunction_{j}.csv"),
                &["x", "re_phi", "im_phi"],
                xs.iter().zip(&vals).map(|(x, v)| vec![num(*x), num(v.re), num(v.im)]).collect(),
            );
            a.plot(&format!("eigenfunction_{j}.dat"), xs.iter().zip(&vals).map(|(x, v)| (*x, v.norm())).collect());
        }
    }
    a.table(
        "scattering.csv",
        &["index", "lambda", "identity_error", "normalization_error", "integral_residual", "tail_re", "tail_im", "gamma_re", "gamma_im", "flatness"],
        rows,
    );
    Ok((json(&data)?, checks))
}

#[derive(Serialize)]
struct BsResult {
    spectrum: DiscreteSpectrum,
    counts: Vec<BsCount>,
    failures: Vec<String>,
}

fn run_bs(c: &RunConfig, a: &mut Artifacts) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let spec = c.potential();
    let grid = c.physical();
    let spectrum = discrete_spectrum(spec, c.frequency_grid)?;
    let u = positive_part(&spec.sample(&grid)?);
    let sup = u.iter().fold(0.0f64, |m, v| m.max(*v));
    let mut checks = Vec::new();
    let mut counts = Vec::new();
    let mut failures = Vec::new();
    for &e in &c.energies {
        let op = assemble_k(&u, &grid, e, &c.cutoff_spec())?;
        let p = format!("E={e}");
        match bs_count(&op, &spectrum.eigenvalues, bo_scatter::lax::tol_stab(-e, sup)) {
            Ok(count) => {
                checks.push(CheckRow::measured("bs_correspondence", &p, 0.0, Relation::AtMost, 0.0).with_note(format!(
                    "count {} cross_check {}",
                    count.count, count.cross_check
                )));
                counts.push(count);
            }
            Err(bo_scatter::Error::Correspondence(msg)) => {
                checks.push(CheckRow::measured("bs_correspondence", &p, 1.0, Relation::AtMost, 0.0).with_note(msg.clone()));
                failures.push(msg);
            }
            Err(e) => return Err(e.into()),
        }
    }
    checks.extend(resolvent_rows("potential", spec, &grid, spectrum.eigenvalues.first().copied()));
    a.table(
        "bs.csv",
        &["E", "count", "cross_check", "strict_count", "strict_cross_check", "top_eigenvalue"],
        counts
            .iter()
            .map(|k| {
                vec![
                    num(k.e),
                    k.count.to_string(),
                    k.cross_check.to_string(),
                    k.strict_count.to_string(),
                    k.strict_cross_check.to_string(),
                    k.top_eigenvalues.first().map_or(String::new(), |v| num(*v)),
                ]
            })
            .collect(),
    );
    a.plot("bs_top_eigenvalue.dat", counts.iter().filter_map(|k| k.top_eigenvalues.first().map(|t| (k.e, *t))).collect());
    Ok((json(&BsResult { spectrum, counts, failures })?, checks))
}

#[derive(Serialize)]
struct SecularResult {
    solves: Vec<SecularSolve>,
    scan: ScanReport,
}

fn run_secular(c: &RunConfig, a: &mut Artifacts) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let grid = c.physical();
    let spec = c.potential();
    let u = spec.sample(&grid)?;
    if u.iter().any(|v| *v < 0.0) {
        return Err(usage("secular: the potential must be nonnegative on the physical grid"));
    }
    let cutoff = c.cutoff_spec();
    let mut solves = Vec::new();
    let mut checks = Vec::new();
    for &e in &c.energies {
        let p = format!("E={e}");
        match secular_solve(&assemble_k(&u, &grid, e, &cutoff)?, c.lambda0) {
            Ok(s) => {
                checks.push(
                    CheckRow::measured("secular_equivalence", &p, s.eigen_mismatch, Relation::AtMost, SECULAR_TOL)
                        .with_note(format!("leading-order ratio {:.6}", s.leading_ratio)),
                );
                solves.push(s);
            }
            // A depth where the fixed point fails is a failed row, not an aborted scan.
            Err(err @ (bo_scatter::Error::Range(_) | bo_scatter::Error::Convergence(_))) => {
                checks.push(CheckRow::errored("secular_equivalence", &p, SECULAR_TOL, Relation::AtMost, err));
            }
            Err(err) => return Err(err.into()),
        }
    }
    let solved: Vec<f64> = solves.iter().map(|s| s.e).collect();
    let scan = count_bound_scan(&u, &grid, &solved, &cutoff)?;
    checks.push(CheckRow::measured("scan_band", "potential", scan.band_ratio, Relation::AtMost, SCAN_BAND));
    checks.push(CheckRow::measured("scan_hs_growth", "potential", scan.hs_growth, Relation::AtLeast, SCAN_GROWTH));
    checks.push(CheckRow::measured("scan_count_tail", "potential", if scan.count_constant_tail { 0.0 } else { 1.0 }, Relation::AtMost, 0.0));
    a.table(
        "secular.csv",
        &["E", "lambda_root", "top_eigenvalue", "eigen_mismatch", "leading_ratio", "iterations"],
        solves
            .iter()
            .map(|s| vec![num(s.e), num(s.lambda_root), num(s.top_eigenvalue), num(s.eigen_mismatch), num(s.leading_ratio), s.iterations.to_string()])
            .collect(),
    );
    // The Lax count below -E cross-checks the scan; an unresolvable spectrum leaves the column empty.
    let spectrum = discrete_spectrum(spec, c.frequency_grid).ok();
    let cross_check = |e: f64| spectrum.as_ref().map_or(String::new(), |s| s.count_below(e).to_string());
    a.table(
        "scan.csv",
        &["E", "count", "cross_check", "hs_k_sq", "inv_lambda_sq", "bound_value"],
        scan.rows
            .iter()
            .map(|r| vec![num(r.e), r.count.to_string(), cross_check(r.e), num(r.hs_k_sq), num(r.inv_lambda_sq), num(r.bound_value)])
            .collect(),
    );
    a.plot("leading_ratio.dat", solves.iter().map(|s| (s.e, s.leading_ratio)).collect());
    a.plot("scan_bound.dat", scan.rows.iter().map(|r| (r.e, r.bound_value)).collect());
    a.plot("scan_hs_k_sq.dat", scan.rows.iter().map(|r| (r.e, r.hs_k_sq)).collect());
    Ok((json(&SecularResult { solves, scan })?, checks))
}

fn run_sweep(c: &RunConfig, a: &mut Artifacts) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let b: CouplingBranch = coupling_sweep(c.potential(), &c.couplings, c.frequency_grid, MONOTONE_TOL)?;
    let checks = b
        .worst_increment
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let row = CheckRow::measured("coupling_monotonicity", &format!("branch {n}"), *w, Relation::AtMost, -MONOTONE_TOL);
            if w.is_finite() {
                row
            } else {
                row.with_note("branch present at a single coupling; no increment to test")
            }
        })
        .collect();
    let mut rows = Vec::new();
    for (n, branch) in b.branches.iter().enumerate() {
        let pts: Vec<(f64, f64)> = b.couplings.iter().zip(branch).filter_map(|(c, v)| v.map(|v| (*c, v))).collect();
        rows.extend(pts.iter().map(|(c, v)| vec![n.to_string(), num(*c), num(*v)]));
        a.plot(&format!("branch_{n}.dat"), pts);
    }
    a.table("sweep.csv", &["branch", "coupling", "eigenvalue"], rows);
    Ok((json(&b)?, checks))
}

#[derive(Serialize)]
struct EvolveResult {
    grid: PhysicalGrid,
    conserved: Vec<bo_scatter::evolve::Conserved>,
    peak_track: Vec<(f64, f64)>,
    drift: DriftReport,
    conservation_drift: (f64, f64),
    time_reversal_error: f64,
}

fn run_evolve(c: &RunConfig, a: &mut Artifacts, timings: &mut Timings) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let config = c.evolution.clone().expect("resolved");
    let t = Instant::now();
    let traj: Trajectory = evolve(c.potential(), &config)?;
    timings.stages.push(("evolve".into(), t.elapsed().as_secs_f64()));
    let t = Instant::now();
    let drift = isospectral_drift(&traj, c.frequency_grid)?;
    timings.stages.push(("isospectral_drift".into(), t.elapsed().as_secs_f64()));
    let t = Instant::now();
    let reversal = time_reversal_error(c.potential(), &config)?;
    timings.stages.push(("time_reversal".into(), t.elapsed().as_secs_f64()));
    let (mass, energy) = traj.conservation_drift();
    let mut checks = vec![
        CheckRow::measured("mass_drift", "potential", mass, Relation::AtMost, 1e-8),
        CheckRow::measured("energy_drift", "potential", energy, Relation::AtMost, 1e-8),
        CheckRow::measured("reality", "potential", traj.max_imag(), Relation::AtMost, 1e-12),
        CheckRow::measured("time_reversal", "potential", reversal, Relation::AtMost, 1e-6),
    ];
    for b in &drift.branches {
        checks.push(CheckRow::measured("isospectral_drift", &format!("lambda0={:.6e}", b.lambda0), b.max_relative_drift, Relation::AtMost, 1e-3));
    }
    if let Some(w) = &drift.topology_warning {
        checks.push(CheckRow::measured("branch_topology", "potential", 1.0, Relation::AtMost, 0.0).with_note(w.clone()));
    }
    let xs = traj.grid.points();
    let mut rows = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        rows.extend(xs.iter().zip(&s.u).map(|(x, u)| vec![num(s.t), num(*x), num(*u)]));
        a.plot(&format!("snapshot_{k}.dat"), xs.iter().copied().zip(s.u.iter().copied()).collect());
    }
    a.table("trajectory.csv", &["t", "x", "u"], rows);
    a.table(
        "conserved.csv",
        &["t", "mass", "energy", "max_imag", "sup"],
        traj.conserved.iter().map(|c| vec![num(c.t), num(c.mass), num(c.energy), num(c.max_imag), num(c.sup)]).collect(),
    );
    let mut drows = Vec::new();
    for (t, ev) in drift.times.iter().zip(&drift.eigenvalues) {
        drows.extend(ev.iter().enumerate().map(|(j, l)| vec![num(*t), j.to_string(), num(*l)]));
    }
    a.table("drift.csv", &["t", "branch", "lambda"], drows);
    for (j, b) in drift.branches.iter().enumerate() {
        let pts = drift
            .times
            .iter()
            .zip(&drift.eigenvalues)
            .filter_map(|(t, ev)| ev.get(j).map(|l| (*t, (l - b.lambda0).abs() / b.lambda0.abs())))
            .collect();
        a.plot(&format!("drift_branch_{j}.dat"), pts);
    }
    a.plot("mass.dat", traj.conserved.iter().map(|c| (c.t, c.mass)).collect());
    a.plot("energy.dat", traj.conserved.iter().map(|c| (c.t, c.energy)).collect());
    let peak_track = traj.peak_track();
    a.plot("peak.dat", peak_track.clone());
    let result = EvolveResult {
        grid: traj.grid,
        conserved: traj.conserved.clone(),
        peak_track,
        drift,
        conservation_drift: (mass, energy),
        time_reversal_error: reversal,
    };
    Ok((json(&result)?, checks))
}

fn run_verify(c: &RunConfig, a: &mut Artifacts) -> Result<(serde_json::Value, Vec<CheckRow>)> {
    let mut corpus = match (&c.corpus, &c.potential) {
        (Some(corpus), _) => corpus.clone(),
        (None, Some(p)) => vec![CorpusEntry::new("potential", p.clone())],
        (None, None) => default_corpus()?,
    };
    if let Some(g) = c.frequency_grid {
        corpus.iter_mut().filter(|e| e.grid.is_none()).for_each(|e| e.grid = Some(g));
    }
    let custom = c.corpus.is_some() || c.potential.is_some();
    let mut opts = VerifyOptions::with_corpus(corpus);
    opts.physical = c.physical();
    opts.seed = c.seed;
    // Suite-level rows run with the default corpus only; a custom corpus is graded on its own.
    opts.global_checks = !custom;
    let rows = verify_suite(&opts);
    a.table(
        "verify.csv",
        &["check", "potential", "value", "tolerance", "relation", "status"],
        rows.iter()
            .map(|r| {
                vec![
                    r.check.clone(),
                    r.potential.clone(),
                    r.value.map_or(String::new(), num),
                    num(r.tolerance),
                    format!("{:?}", r.relation).to_lowercase(),
                    format!("{:?}", r.status).to_lowercase(),
                ]
            })
            .collect(),
    );
    Ok((json(&opts)?, rows))
}

/// Writes report.json, timings.json, the CSV files and plots/*.dat under `outdir`.
pub fn write_outputs(run: &Run, outdir: &Path) -> Result<()> {
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", outdir.display()));
    fs::create_dir_all(outdir.join("plots")).map_err(io)?;
    let report = serde_json::to_string_pretty(&run.report).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(outdir.join("report.json"), report + "\n").map_err(io)?;
    let timings = serde_json::to_string_pretty(&run.timings).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(outdir.join("timings.json"), timings + "\n").map_err(io)?;
    for (name, header, rows) in &run.artifacts.csv {
        let mut w = csv::Writer::from_path(outdir.join(name)).map_err(|e| CliError::Output(e.to_string()))?;
        w.write_record(header).map_err(|e| CliError::Output(e.to_string()))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.flush().map_err(io)?;
    }
    for (name, points) in &run.artifacts.plots {
        let text: String = points.iter().map(|(x, y)| format!("{x:e} {y:e}\n")).collect();
        fs::write(outdir.join("plots").join(name), text).map_err(io)?;
    }
    Ok(())
}

/// One line per check for the terminal.
pub fn summary(report: &RunReport) -> String {
    let mut out = String::new();
    for r in &report.checks {
        let value = r.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let rel = match r.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        out.push_str(&format!("{:?}\t{}\t{}\t{value} {rel} {:.3e}\n", r.status, r.check, r.potential, r.tolerance));
    }
    out.push_str(if report.passed { "all checks passed\n" } else { "some checks failed\n" });
    out
}
