mod common;

use bo_scatter::evolve::*;
use bo_scatter::potentials::PotentialSpec;
use bo_scatter::Error;
use common::*;

fn config(t_final: f64) -> EvolutionConfig {
    EvolutionConfig { t_final, snapshot_stride: 1000, ..Default::default() }
}

#[test]
fn soliton_travels_at_speed_nu() {
    let nu = 1.0;
    let traj = evolve(&PotentialSpec::soliton(nu, 0.0), &config(10.0)).unwrap();
    let last = traj.snapshots.last().unwrap();
    let shift = soliton_speed(nu) * last.t;
    let err = traj
        .grid
        .points()
        .iter()
        .zip(&last.u)
        .map(|(x, u)| (u - soliton_profile(nu, shift, *x)).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-3, "profile error {err:e}");
    for (t, x) in traj.peak_track() {
        assert!((x - soliton_speed(nu) * t).abs() <= 1e-3, "t = {t}: peak at {x}");
    }
    let (mass, energy) = traj.conservation_drift();
    assert!(mass <= 1e-8 && energy <= 1e-8, "drift {mass:e} {energy:e}");
    assert!(traj.max_imag() <= 1e-12);
    assert!(traj.conserved.len() == traj.snapshots.len());
}

#[test]
fn faster_soliton_keeps_its_speed() {
    let nu = 2.0;
    let cfg = EvolutionConfig { t_final: 2.0, snapshot_stride: 500, dt: 5e-4, ..Default::default() };
    let traj = evolve(&PotentialSpec::soliton(nu, -20.0), &cfg).unwrap();
    for (t, x) in traj.peak_track() {
        assert!((x + 20.0 - soliton_speed(nu) * t).abs() <= 1e-3, "t = {t}: peak at {x}");
    }
}

#[test]
fn conserved_quantities_match_closed_forms() {
    let traj = evolve(&PotentialSpec::soliton(1.0, 0.0), &config(1.0)).unwrap();
    let c = traj.conserved[0];
    // int u = 2 pi; the window cuts off a tail of 2 int_{|x|>200} dx / x^2 = 0.02.
    assert!((c.mass - (2.0 * std::f64::consts::PI - 0.02)).abs() < 1e-4, "{}", c.mass);
    assert!(rel(c.energy, soliton_l2_sq(1.0)) < 1e-6, "{}", c.energy);
}

#[test]
fn zero_data_stays_zero() {
    let traj = evolve(&PotentialSpec::zero(), &config(1.0)).unwrap();
    assert!(traj.snapshots.iter().all(|s| s.u.iter().all(|&v| v == 0.0)));
    let report = isospectral_drift(&traj, None).unwrap();
    assert!(report.branches.is_empty() && report.times.is_empty());
}

#[test]
fn soliton_spectrum_is_conserved() {
    let traj = evolve(&PotentialSpec::soliton(1.0, 0.0), &config(5.0)).unwrap();
    let report = isospectral_drift(&traj, None).unwrap();
    assert_eq!(report.branches.len(), 1);
    assert!(report.topology_warning.is_none());
    assert!(rel(report.branches[0].lambda0, soliton_eigenvalue(1.0)) <= 1e-3);
    assert!(report.max_drift() <= 1e-3, "{report:?}");
}

#[test]
fn two_soliton_spectrum_is_conserved() {
    let spec = PotentialSpec::multi_soliton(&[(1.0, -30.0), (2.0, 30.0)]);
    let cfg = EvolutionConfig { t_final: 3.0, dt: 5e-4, snapshot_stride: 2000, ..Default::default() };
    let traj = evolve(&spec, &cfg).unwrap();
    let report = isospectral_drift(&traj, None).unwrap();
    assert_eq!(report.branches.len(), 2, "{report:?}");
    let expected = separated_solitons_spectrum(&[1.0, 2.0]);
    for (b, e) in report.branches.iter().zip(&expected) {
        assert!(rel(b.lambda0, *e) <= 5e-3, "{} vs {e}", b.lambda0);
        assert!(b.max_relative_drift <= 5e-3, "{b:?}");
    }
}

#[test]
fn reversing_time_returns_initial_data() {
    let err = time_reversal_error(&PotentialSpec::soliton(1.0, 0.0), &config(2.0)).unwrap();
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn cfl_violations_are_configuration_errors() {
    let cfg = EvolutionConfig { dt: 0.02, t_final: 1.0, snapshot_stride: 50, ..Default::default() };
    assert!(matches!(evolve(&PotentialSpec::soliton(1.0, 0.0), &cfg), Err(Error::Parameter(_))));
    let cfg = EvolutionConfig { dt: 4e-3, t_final: 1.0, snapshot_stride: 250, ..Default::default() };
    assert!(evolve(&PotentialSpec::soliton(1.0, 0.0), &cfg).is_ok());
    assert!(matches!(evolve(&PotentialSpec::soliton(40.0, 0.0), &cfg), Err(Error::Parameter(_))));
}
