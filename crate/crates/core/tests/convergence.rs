//! Convergence-order studies for the evolution-identity residuals and
//! cross-checks of the del-bar spectrum against the independent
//! Jacobi-basis oracle.

use krf_core::flow::{run_flow, FlowConfig, SnapshotWindow};
use krf_core::functionals::{
    delta_h_flow_residual, y_dot_residual, y_dot_residual_signed, MeasureSign,
};
use krf_core::spectral::lambda_min;
use krf_core::{flow, ConformalMetric, LatitudeGrid};

fn study_config(n: usize, cfl: f64) -> FlowConfig {
    FlowConfig {
        n,
        amplitude: 0.05,
        poly: vec![0.0, 0.0, 1.0],
        t_end: 0.45,
        cfl,
        cadence: 0.1,
        convergence_tol: 0.0,
        snapshot_window: Some(SnapshotWindow::new(0.3, 9)),
        spectrum_every: 0,
        sector_cap: 8,
    }
}

fn max_residual(series: &[(f64, f64)]) -> f64 {
    series.iter().fold(0.0_f64, |m, &(_, r)| m.max(r))
}

#[test]
fn h_flow_residual_halves_dt_quarter_residual() {
    let coarse = run_flow(&study_config(64, 0.2)).unwrap();
    let fine = run_flow(&study_config(64, 0.1)).unwrap();
    let rc = max_residual(&flow::h_flow_residual(&coarse).unwrap());
    let rf = max_residual(&flow::h_flow_residual(&fine).unwrap());
    let ratio = rc / rf;
    assert!((3.0..5.3).contains(&ratio), "ratio {ratio} ({rc:e} / {rf:e})");
}

#[test]
fn y_dot_residual_halves_dt_quarter_residual() {
    let coarse = run_flow(&study_config(64, 0.2)).unwrap();
    let fine = run_flow(&study_config(64, 0.1)).unwrap();
    let rc = max_residual(&y_dot_residual(&coarse).unwrap());
    let rf = max_residual(&y_dot_residual(&fine).unwrap());
    let ratio = rc / rf;
    assert!((3.0..5.3).contains(&ratio), "ratio {ratio} ({rc:e} / {rf:e})");
}

#[test]
fn y_dot_sign_adjudication() {
    // the adopted measure sign must beat the flipped one by an order of
    // magnitude on perturbed data
    let traj = run_flow(&study_config(64, 0.2)).unwrap();
    let adopted = max_residual(&y_dot_residual_signed(&traj, MeasureSign::Adopted).unwrap());
    let flipped = max_residual(&y_dot_residual_signed(&traj, MeasureSign::Flipped).unwrap());
    assert!(
        flipped > 10.0 * adopted,
        "adopted {adopted:e}, flipped {flipped:e}"
    );
}

#[test]
fn y_dot_residual_vanishes_on_round() {
    let mut config = study_config(48, 0.2);
    config.amplitude = 0.0;
    let traj = run_flow(&config).unwrap();
    let res = max_residual(&y_dot_residual(&traj).unwrap());
    assert!(res < 1e-10, "residual {res:e}");
}

#[test]
fn delta_h_residual_halves_dt_quarter_residual() {
    let coarse = run_flow(&study_config(64, 0.2)).unwrap();
    let fine = run_flow(&study_config(64, 0.1)).unwrap();
    let rc = max_residual(&delta_h_flow_residual(&coarse).unwrap());
    let rf = max_residual(&delta_h_flow_residual(&fine).unwrap());
    let ratio = rc / rf;
    assert!((3.0..5.3).contains(&ratio), "ratio {ratio} ({rc:e} / {rf:e})");
}

#[test]
fn delta_h_residual_vanishes_on_round() {
    let mut config = study_config(48, 0.2);
    config.amplitude = 0.0;
    let traj = run_flow(&config).unwrap();
    let res = max_residual(&delta_h_flow_residual(&traj).unwrap());
    assert!(res < 1e-10, "residual {res:e}");
}

#[test]
fn round_spectrum_matches_jacobi_oracle() {
    let m = ConformalMetric::round(LatitudeGrid::new(128).unwrap());
    let rep = lambda_min(&m, 8).unwrap();
    let oracle = krf_oracle::round_lambda_min(8, 32);
    assert!(
        (rep.lambda_min - oracle).abs() < 1e-9 * oracle,
        "{} vs oracle {oracle}",
        rep.lambda_min
    );
    // a few sector minima against the oracle ladder
    for k in [0_i32, 1, 2, 3, 4] {
        let got = rep
            .sectors
            .iter()
            .find(|s| s.sector == k)
            .and_then(|s| s.lambda_min)
            .unwrap();
        let want = krf_oracle::first_positive(&krf_oracle::round_sector_spectrum(k, 32));
        assert!((got - want).abs() < 1e-8 * want, "sector {k}: {got} vs {want}");
    }
}

#[test]
fn eigenvalue_continuity_in_perturbation() {
    let grid = LatitudeGrid::new(96).unwrap();
    let base = ConformalMetric::round(grid.clone());
    let lambda0 = lambda_min(&base, 6).unwrap().lambda_min;

    let mut gaps = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let u: Vec<f64> = grid.cos_xi().iter().map(|c| eps * c * c).collect();
        let m = ConformalMetric::new(grid.clone(), u).unwrap();
        let lam = lambda_min(&m, 6).unwrap().lambda_min;
        gaps.push((lam - lambda0).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "gaps {gaps:?}");
    assert!(gaps[2] < 0.01 * lambda0, "final gap {} vs 1% of {lambda0}", gaps[2]);
}

#[test]
fn key_inequality_holds_along_run() {
    let config = FlowConfig {
        n: 64,
        amplitude: 0.05,
        poly: vec![0.0, 0.0, 1.0],
        t_end: 2.0,
        cfl: 0.2,
        cadence: 0.05,
        convergence_tol: 1e-9,
        snapshot_window: None,
        spectrum_every: 1,
        sector_cap: 6,
    };
    let traj = run_flow(&config).unwrap();
    let rows = krf_core::spectral::key_inequality_check(&traj).unwrap();
    assert!(rows.len() > 10);
    for row in &rows {
        assert!(
            row.satisfied,
            "violated at t = {}: lhs {} > rhs {}",
            row.t, row.lhs, row.rhs
        );
    }
}

#[test]
fn lambda_stays_above_half_round_value_along_run() {
    // perturbation amplitudes up to 0.1 keep the gap above half the round one
    for amp in [0.05, 0.1] {
        let config = FlowConfig {
            n: 64,
            amplitude: amp,
            poly: vec![0.0, 0.0, 1.0],
            t_end: 1.5,
            cadence: 0.25,
            spectrum_every: 1,
            sector_cap: 6,
            ..FlowConfig::default()
        };
        let traj = run_flow(&config).unwrap();
        for r in &traj.records {
            assert!(r.lambda_min > 1.0, "amp {amp}, t {}: lambda {}", r.t, r.lambda_min);
        }
    }
}

#[test]
fn global_error_is_fourth_order_in_dt() {
    // integrate to exactly the same final time with matched step counts
    let grid = LatitudeGrid::new(48).unwrap();
    let m0 = krf_core::flow::initial_metric(grid, 0.05, &[0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let start = krf_core::flow::FlowState::new(m0, 0.0, 0).unwrap();
    let t_final = 0.05;
    let run_steps = |k: usize| -> Vec<f64> {
        let dt = t_final / k as f64;
        let mut state = start.clone();
        for _ in 0..k {
            state = krf_core::flow::flow_step(&state, dt).unwrap();
        }
        state.metric.u().to_vec()
    };
    let coarse = run_steps(32);
    let half = run_steps(64);
    let reference = run_steps(512);
    let err = |u: &[f64]| -> f64 {
        u.iter()
            .zip(&reference)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let ratio = err(&coarse) / err(&half);
    assert!(
        (16.0 / 1.3..16.0 * 1.3).contains(&ratio),
        "global order ratio {ratio} ({:e} / {:e})",
        err(&coarse),
        err(&half)
    );
}

#[test]
fn mabuchi_limit_stable_under_longer_runs() {
    let run_nu = |t_end: f64| -> f64 {
        let config = FlowConfig {
            n: 64,
            amplitude: 0.05,
            poly: vec![0.0, 0.0, 1.0],
            t_end,
            cadence: 0.05,
            convergence_tol: 0.0,
            spectrum_every: 0,
            ..FlowConfig::default()
        };
        let traj = run_flow(&config).unwrap();
        *krf_core::functionals::mabuchi_path(&traj).unwrap().last().unwrap()
    };
    let nu_short = run_nu(3.0);
    let nu_long = run_nu(6.0);
    assert!(nu_long.is_finite() && nu_long < 0.0);
    let change = (nu_long - nu_short).abs() / nu_long.abs();
    assert!(change < 0.01, "Mabuchi limit moved by {:.3}%", 100.0 * change);
}

#[test]
fn eigenvalue_continuity_is_first_order() {
    let grid = LatitudeGrid::new(96).unwrap();
    let lambda0 = lambda_min(&ConformalMetric::round(grid.clone()), 4)
        .unwrap()
        .lambda_min;
    let gap_at = |eps: f64| -> f64 {
        let u: Vec<f64> = grid.cos_xi().iter().map(|c| eps * c * c).collect();
        let m = ConformalMetric::new(grid.clone(), u).unwrap();
        (lambda_min(&m, 4).unwrap().lambda_min - lambda0).abs()
    };
    let g1 = gap_at(1e-2);
    let g2 = gap_at(1e-3);
    // empirical order >= 1: a decade of eps buys at least a factor 5
    assert!(g1 / g2 >= 5.0, "gap ratio {} ({g1:e} / {g2:e})", g1 / g2);
}

#[test]
fn core_types_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<LatitudeGrid>();
    assert_send_sync::<ConformalMetric>();
    assert_send_sync::<krf_core::ScalarField>();
    assert_send_sync::<krf_core::flow::Trajectory>();
    assert_send_sync::<krf_core::spectral::SectorVectorField>();
}

#[test]
fn key_inequality_trivial_on_round() {
    let config = FlowConfig {
        n: 48,
        amplitude: 0.0,
        poly: vec![1.0],
        t_end: 0.5,
        cfl: 0.2,
        cadence: 0.1,
        convergence_tol: 0.0,
        snapshot_window: None,
        spectrum_every: 1,
        sector_cap: 4,
    };
    let traj = run_flow(&config).unwrap();
    for row in krf_core::spectral::key_inequality_check(&traj).unwrap() {
        assert!(row.satisfied);
        assert!(row.lhs.abs() < 1e-12 && row.rhs.abs() < 1e-9);
    }
}
