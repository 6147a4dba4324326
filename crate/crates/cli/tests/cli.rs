use bo_scatter::grid::FrequencyGrid;
use bo_scatter::potentials::{Family, PotentialSpec};
use bo_scatter::verify::{CorpusEntry, Status};
use bo_scatter_cli::{parse_config, run, Command, RunConfig, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use std::path::Path;
use std::process::Command as Process;

fn soliton(nu: f64) -> PotentialSpec {
    PotentialSpec::soliton(nu, 0.0)
}

fn binary(config: &Path, outdir: &Path) -> std::process::Output {
    Process::new(env!("CARGO_BIN_EXE_bo-scatter"))
        .arg("--config")
        .arg(config)
        .arg("--outdir")
        .arg(outdir)
        .arg("--quiet")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, config: &RunConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

#[test]
fn spectrum_of_a_soliton_is_one_eigenvalue() {
    let r = run(&RunConfig::new(Command::Spectrum).with_potential(soliton(1.0))).unwrap();
    let ev = r.report.result["eigenvalues"].as_array().unwrap();
    assert_eq!(ev.len(), 1);
    assert!((ev[0].as_f64().unwrap() + 0.5).abs() < 1e-4, "{ev:?}");
    assert!(r.report.passed);
    assert_eq!(r.exit_code(), EXIT_PASS);
}

#[test]
fn zero_corpus_verifies_as_degenerate_pass() {
    let mut c = RunConfig::new(Command::Verify);
    c.corpus = Some(vec![CorpusEntry::new("zero", PotentialSpec { family: Family::Tabulated { x: vec![-1.0, 0.0, 1.0], u: vec![0.0; 3] }, coupling: 1.0 })]);
    let r = run(&c).unwrap();
    assert!(!r.report.checks.is_empty());
    assert!(r.report.passed, "{}", bo_scatter_cli::summary(&r.report));
}

#[test]
fn bs_count_for_a_soliton() {
    let mut c = RunConfig::new(Command::Bs).with_potential(soliton(1.0));
    c.energies = vec![0.25];
    let r = run(&c).unwrap();
    let count = &r.report.result["counts"][0];
    assert_eq!(count["count"], 1);
    assert_eq!(count["cross_check"], 1);
    assert!(r.report.checks.iter().any(|row| row.check == "resolvent_hs_stated_constant"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let c = RunConfig::new(Command::Scattering).with_potential(soliton(1.0));
    let cfg = write_config(dir.path(), &c);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(binary(&cfg, &a).status.code(), Some(EXIT_PASS));
    assert_eq!(binary(&cfg, &b).status.code(), Some(EXIT_PASS));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb);
    assert!(a.join("timings.json").exists());
    assert!(a.join("scattering.csv").exists());
    assert!(a.join("plots").join("eigenfunction_0.dat").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"command\": \"spectrum\", \"potental\": {}}").unwrap();
    let out = binary(&bad, &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    let missing = RunConfig::new(Command::Spectrum)
        .with_potential(PotentialSpec { family: Family::FromFile { path: "absent.csv".into() }, coupling: 1.0 });
    let out = binary(&write_config(dir.path(), &missing), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(EXIT_USAGE));

    let no_potential = RunConfig::new(Command::Spectrum);
    let out = binary(&write_config(dir.path(), &no_potential), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}

#[test]
fn configs_round_trip() {
    let mut c = RunConfig::new(Command::Secular).with_potential(soliton(0.5));
    c.energies = vec![1e-2, 1e-3];
    c.lambda0 = Some(0.25);
    c.seed = 7;
    c.frequency_grid = Some(FrequencyGrid::new(512, 8.0).unwrap());
    let text = serde_json::to_string(&c).unwrap();
    assert_eq!(parse_config(&text).unwrap(), c);
    let resolved = c.resolved();
    assert_eq!(parse_config(&serde_json::to_string(&resolved).unwrap()).unwrap(), resolved);
}

#[test]
fn relative_potential_files_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let xs: Vec<f64> = (0..801).map(|k| -40.0 + 0.1 * k as f64).collect();
    let csv: String = xs.iter().map(|x| format!("{x},{}\n", 2.0 / (x * x + 1.0))).collect();
    std::fs::write(dir.path().join("u.csv"), csv).unwrap();
    let c = RunConfig::new(Command::Spectrum).with_potential(PotentialSpec { family: Family::FromFile { path: "u.csv".into() }, coupling: 1.0 });
    let out = binary(&write_config(dir.path(), &c), &dir.path().join("o"));
    assert!(out.status.code() == Some(EXIT_PASS) || out.status.code() == Some(EXIT_CHECK_FAILED), "{out:?}");
    assert!(dir.path().join("o").join("report.json").exists());
}

#[test]
fn coarse_grid_fails_the_identity_check() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(Command::Verify).with_potential(soliton(1.0));
    c.frequency_grid = Some(FrequencyGrid::new(64, 16.0).unwrap());
    let out = binary(&write_config(dir.path(), &c), &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(EXIT_CHECK_FAILED));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("o").join("report.json")).unwrap()).unwrap();
    let identity = report["checks"].as_array().unwrap().iter().find(|r| r["check"].as_str().unwrap().contains("identity")).unwrap();
    assert_eq!(identity["status"], serde_json::json!(Status::Fail));
}
