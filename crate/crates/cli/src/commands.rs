//! Subcommand implementations. Exit codes: 0 success, 2 configuration or
//! input parse failure, 3 numerical blow-up (partial artifacts are still
//! written), 4 identity-residual or validation failure.

use crate::config::RunConfig;
use crate::ratefit::{rate_fit, RateFit};
use crate::report;
use anyhow::Context;
use krf_core::compat::{hermitian_compat_residual, AlmostComplexTensor, RealMetricTensor};
use krf_core::curvop2::{self, CurvatureTensor2};
use krf_core::flow::{self, run_flow, Outcome};
use krf_core::functionals::{delta_h_flow_residual, y_dot_residual};
use krf_core::geometry::ricci_potential;
use krf_core::spectral;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Clone, Serialize)]
struct ResidualMaxima {
    #[serde(skip_serializing_if = "Option::is_none")]
    h_flow: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y_dot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_h: Option<f64>,
}

/// Integrate a flow per the config and write trajectory.csv, summary.json,
/// and any requested snapshots into the output directory.
pub fn run(config: &RunConfig, out_dir: &Path, quiet: bool) -> anyhow::Result<i32> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let traj = match run_flow(&config.flow_config()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("flow setup failed: {e}");
            return Ok(EXIT_CONFIG);
        }
    };

    fs::write(out_dir.join("trajectory.csv"), report::trajectory_csv(&traj.records))?;
    write_snapshots(config, &traj, out_dir)?;

    // residual maxima over the snapshot window, when one was recorded
    let mut exit = EXIT_OK;
    let take_max = |series: Vec<(f64, f64)>| {
        series.into_iter().fold(0.0_f64, |m, (_, r)| m.max(r))
    };
    let residuals = if traj.snapshots.len() >= 3 {
        let h_flow = take_max(flow::h_flow_residual(&traj)?);
        let y_dot = take_max(y_dot_residual(&traj)?);
        let delta_h = take_max(delta_h_flow_residual(&traj)?);
        if h_flow > config.tolerances.h_flow_residual_max
            || y_dot > config.tolerances.identity_residual_max
            || delta_h > config.tolerances.identity_residual_max
        {
            exit = EXIT_CHECK_FAILED;
        }
        ResidualMaxima { h_flow: Some(h_flow), y_dot: Some(y_dot), delta_h: Some(delta_h) }
    } else {
        ResidualMaxima { h_flow: None, y_dot: None, delta_h: None }
    };

    // rate fit against the spectrum of the final metric
    let final_report = spectral::lambda_min(&traj.final_state.metric, config.spectral.sector_cap)?;
    let series: Vec<(f64, f64)> = traj.records.iter().map(|r| (r.t, r.y)).collect();
    let fit = rate_fit(
        &series,
        final_report.lambda_min,
        config.tolerances.fit_floor,
        config.tolerances.fit_ceiling,
    );

    let equivalence = flow::metric_equivalence_report(&traj)?;
    let outcome = match &traj.outcome {
        Outcome::Converged { .. } => "converged",
        Outcome::ReachedEnd => "reached_end",
        Outcome::BlewUp { .. } => "blew_up",
    };
    if matches!(traj.outcome, Outcome::BlewUp { .. }) {
        exit = EXIT_BLOWUP;
    }

    let summary = summary_json(config, &traj, &fit, &residuals, &equivalence, &final_report, outcome, exit);
    fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    if !quiet {
        println!(
            "{outcome}: t = {}, records = {}, lambda = {}, exit = {exit}",
            traj.final_state.t,
            traj.records.len(),
            final_report.lambda_min
        );
    }
    Ok(exit)
}

#[allow(clippy::too_many_arguments)]
fn summary_json(
    config: &RunConfig,
    traj: &krf_core::flow::Trajectory,
    fit: &RateFit,
    residuals: &ResidualMaxima,
    equivalence: &flow::EquivalenceReport,
    final_report: &spectral::SpectralReport,
    outcome: &str,
    exit: i32,
) -> serde_json::Value {
    let area_drift = traj
        .records
        .iter()
        .fold(0.0_f64, |m, r| m.max((r.area - 4.0 * std::f64::consts::PI).abs()));
    let futaki_max = traj.records.iter().fold(0.0_f64, |m, r| m.max(r.futaki.abs()));
    json!({
        "schema_version": report::SCHEMA_VERSION,
        "seed": config.seed,
        "outcome": outcome,
        "converged": traj.converged(),
        "exit_code": exit,
        "dt": traj.dt,
        "final_t": traj.final_state.t,
        "records": traj.records.len(),
        "final_sup_gdot": traj.records.last().map(|r| r.sup_gdot),
        "area_drift_max": area_drift,
        "futaki_max_abs": futaki_max,
        "mabuchi_final": traj.records.last().map(|r| r.nu),
        "lambda_final": final_report.lambda_min,
        "kernel_dim": final_report.kernel_dim_total,
        "tail_increasing": final_report.tail_increasing,
        "rate_fit": serde_json::to_value(fit).unwrap(),
        "residual_maxima": serde_json::to_value(residuals).unwrap(),
        "equivalence": {
            "integral": equivalence.integral,
            "ratio_min": equivalence.ratio_bounds.0,
            "ratio_max": equivalence.ratio_bounds.1,
            "envelope_ok": equivalence.envelope_ok,
        },
        "config": serde_json::to_value(config).unwrap(),
    })
}

fn write_snapshots(
    config: &RunConfig,
    traj: &krf_core::flow::Trajectory,
    out_dir: &Path,
) -> anyhow::Result<()> {
    for (idx, &t) in config.snapshots.times.iter().enumerate() {
        // reconstruct the nearest recorded state from the trajectory by
        // integrating is not possible; snapshots come from the window or the
        // final state, so fall back to whichever step state is closest
        let state = nearest_state(traj, t)?;
        let (h, mu) = ricci_potential(&state.0)?;
        let text = report::snapshot_text(
            state.1,
            mu,
            state.0.area(),
            state.0.grid().nodes(),
            state.0.u(),
            h.values(),
        );
        fs::write(out_dir.join(format!("snapshot_{idx:02}.txt")), text)?;
    }
    Ok(())
}

/// Closest available full state: a window snapshot or the final state.
fn nearest_state(
    traj: &krf_core::flow::Trajectory,
    t: f64,
) -> anyhow::Result<(krf_core::ConformalMetric, f64)> {
    let mut best: Option<(f64, &krf_core::flow::StepSnapshot)> = None;
    for s in &traj.snapshots {
        let d = (s.t - t).abs();
        if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
            best = Some((d, s));
        }
    }
    let final_d = (traj.final_state.t - t).abs();
    if let Some((d, snap)) = best {
        if d <= final_d {
            let grid = traj.final_state.metric.grid().clone();
            let m = krf_core::ConformalMetric::with_raw_area(grid, snap.u.clone())?;
            return Ok((m, snap.t));
        }
    }
    Ok((traj.final_state.metric.clone(), traj.final_state.t))
}

/// Solve the del-bar spectrum of the configured initial metric and write a
/// JSON report.
pub fn spectrum(config: &RunConfig, out_dir: &Path, quiet: bool) -> anyhow::Result<i32> {
    fs::create_dir_all(out_dir)?;
    let grid = krf_core::LatitudeGrid::new(config.grid.n)?;
    let metric = flow::initial_metric(grid, config.init.amplitude, &config.init.poly)?;
    let rep = match spectral::lambda_min(&metric, config.spectral.sector_cap) {
        Ok(r) => r,
        Err(krf_core::CoreError::KernelDegeneracy { found, expected }) => {
            eprintln!("kernel degeneracy: found {found}, expected {expected}");
            return Ok(EXIT_CHECK_FAILED);
        }
        Err(e) => return Err(e.into()),
    };
    let sectors: Vec<_> = rep
        .sectors
        .iter()
        .map(|s| json!({"sector": s.sector, "kernel_dim": s.kernel_dim, "lambda_min": s.lambda_min}))
        .collect();
    let out = json!({
        "schema_version": report::SCHEMA_VERSION,
        "lambda_min": rep.lambda_min,
        "kernel_dim": rep.kernel_dim_total,
        "tail_increasing": rep.tail_increasing,
        "sectors": sectors,
    });
    fs::write(out_dir.join("spectrum.json"), serde_json::to_string_pretty(&out)? + "\n")?;
    if !quiet {
        println!("lambda_min = {}, kernel dim = {}", rep.lambda_min, rep.kernel_dim_total);
    }
    Ok(if rep.kernel_dim_total == 3 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Parse a 16-component curvature record, validate it, and run the
/// eigenvalue bound chain. Field order: the 16 components R_(a b)(c d) in
/// lexicographic (a, b, c, d) order over indices {1, 2}, two reals per line
/// (real and imaginary part), 'bound <value>' optionally as the first line.
pub fn curvop(file: &Path, bound: f64, out_dir: &Path, quiet: bool) -> anyhow::Result<i32> {
    fs::create_dir_all(out_dir)?;
    let text = fs::read_to_string(file)
        .with_context(|| format!("reading tensor record {}", file.display()))?;
    let tensor = match parse_tensor_record(&text) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("tensor record parse failure: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    let tensor = match tensor {
        ParsedTensor::Valid(t) => t,
        ParsedTensor::SymmetryViolation(msg) => {
            let out = json!({
                "schema_version": report::SCHEMA_VERSION,
                "accepted": false,
                "violation": msg,
            });
            fs::write(out_dir.join("curvop.json"), serde_json::to_string_pretty(&out)? + "\n")?;
            if !quiet {
                println!("rejected: {msg}");
            }
            return Ok(EXIT_CHECK_FAILED);
        }
    };

    let op = curvop2::operator_matrix(&tensor);
    let (ricci_nonneg, two_nonneg) = curvop2::condition_c(&tensor);
    let bounds = if ricci_nonneg && two_nonneg {
        Some(curvop2::eigenvalue_bounds(&tensor, bound)?)
    } else {
        None
    };
    let pass = bounds.as_ref().map(|b| b.all_ok()).unwrap_or(false);
    let out = json!({
        "schema_version": report::SCHEMA_VERSION,
        "accepted": true,
        "scalar": tensor.scalar(),
        "ricci_eigenvalues": tensor.ricci_eigenvalues(),
        "op_s_eigenvalues": op.op_s_eigenvalues(),
        "full_eigenvalues": op.eigenvalues(),
        "condition_c": {"ricci_nonneg": ricci_nonneg, "two_nonneg": two_nonneg},
        "bound": bound,
        "bounds_pass": pass,
        "bounds": bounds.map(|b| json!({
            "trace_identity_gap": b.trace_identity_gap,
            "m3_le_half_scalar": b.m3_le_half_scalar,
            "m1_abs_le_m2_plus_m3": b.m1_abs_le_m2_plus_m3,
            "m2_plus_m3_le_bound": b.m2_plus_m3_le_bound,
            "entries_le_spectral_radius": b.entries_le_spectral_radius,
            "s_norm_sq": b.s_norm_sq,
            "s_trace_sq": b.s_trace_sq,
            "full_eig_bound": b.full_eig_bound,
        })),
    });
    fs::write(out_dir.join("curvop.json"), serde_json::to_string_pretty(&out)? + "\n")?;
    if !quiet {
        println!("condition C: ({ricci_nonneg}, {two_nonneg}), bounds pass: {pass}");
    }
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

enum ParsedTensor {
    Valid(CurvatureTensor2),
    SymmetryViolation(String),
}

fn parse_tensor_record(text: &str) -> anyhow::Result<ParsedTensor> {
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            anyhow::bail!("expected 're im' per line, got '{line}'");
        }
        let re: f64 = parts[0].parse().context("real part")?;
        let im: f64 = parts[1].parse().context("imaginary part")?;
        values.push(Complex64::new(re, im));
    }
    if values.len() != 16 {
        anyhow::bail!("expected 16 components, got {}", values.len());
    }
    let mut raw = [[[[Complex64::new(0.0, 0.0); 2]; 2]; 2]; 2];
    let mut it = values.into_iter();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    raw[a][b][c][d] = it.next().unwrap();
                }
            }
        }
    }
    match CurvatureTensor2::from_components(raw) {
        Ok(t) => Ok(ParsedTensor::Valid(t)),
        Err(e) => Ok(ParsedTensor::SymmetryViolation(e.to_string())),
    }
}

#[derive(Debug, serde::Deserialize)]
struct CompatInput {
    g: Vec<Vec<f64>>,
    j: Vec<Vec<f64>>,
    #[serde(default = "default_compat_tol")]
    tolerance: f64,
}

fn default_compat_tol() -> f64 {
    1e-10
}

/// Validate a (g, J) pair from a TOML file and report the Hermitian defect.
pub fn compat(file: &Path, out_dir: &Path, quiet: bool) -> anyhow::Result<i32> {
    fs::create_dir_all(out_dir)?;
    let text = fs::read_to_string(file)
        .with_context(|| format!("reading pair {}", file.display()))?;
    let input: CompatInput = match toml::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("compat input parse failure: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    let to_matrix = |rows: &[Vec<f64>]| -> anyhow::Result<nalgebra::DMatrix<f64>> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            anyhow::bail!("matrix is not square");
        }
        Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    };
    let build = || -> krf_core::Result<(RealMetricTensor, AlmostComplexTensor)> {
        let g = RealMetricTensor::new(to_matrix(&input.g).map_err(|e| {
            krf_core::CoreError::InvalidInput(e.to_string())
        })?)?;
        let j = AlmostComplexTensor::new(to_matrix(&input.j).map_err(|e| {
            krf_core::CoreError::InvalidInput(e.to_string())
        })?)?;
        Ok((g, j))
    };
    let (g, j) = match build() {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("invalid tensor input: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    let residual = hermitian_compat_residual(&g, &j)?;
    let compatible = residual <= input.tolerance;
    let out = json!({
        "schema_version": report::SCHEMA_VERSION,
        "residual": residual,
        "tolerance": input.tolerance,
        "compatible": compatible,
    });
    fs::write(out_dir.join("compat.json"), serde_json::to_string_pretty(&out)? + "\n")?;
    if !quiet {
        println!("residual = {residual:e}, compatible = {compatible}");
    }
    Ok(if compatible { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Debug, serde::Deserialize)]
struct SweepInput {
    configs: Vec<PathBuf>,
}

/// Run each config of the sweep into an isolated subdirectory; worst exit
/// code wins. Runs share nothing mutable, so the parallel mode just scopes
/// one thread per config.
pub fn sweep(list: &Path, out_dir: &Path, parallel: bool, quiet: bool) -> anyhow::Result<i32> {
    let text = fs::read_to_string(list)
        .with_context(|| format!("reading sweep list {}", list.display()))?;
    let input: SweepInput = match toml::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("sweep list parse failure: {e}");
            return Ok(EXIT_CONFIG);
        }
    };
    let base = list.parent().unwrap_or_else(|| Path::new("."));
    let jobs: Vec<(usize, PathBuf, PathBuf)> = input
        .configs
        .iter()
        .enumerate()
        .map(|(i, rel)| {
            let cfg = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
            let stem = rel.file_stem().map(|s| s.to_string_lossy().to_string());
            let name = stem.unwrap_or_else(|| format!("run_{i}"));
            (i, cfg, out_dir.join(format!("{i:03}_{name}")))
        })
        .collect();

    let run_one = |(_, cfg_path, dir): &(usize, PathBuf, PathBuf)| -> i32 {
        match RunConfig::from_path(cfg_path) {
            Ok(cfg) => run(&cfg, dir, quiet).unwrap_or(EXIT_CONFIG),
            Err(e) => {
                eprintln!("config {}: {e}", cfg_path.display());
                EXIT_CONFIG
            }
        }
    };

    let codes: Vec<i32> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = jobs.iter().map(|job| scope.spawn(move || run_one(job))).collect();
            handles.into_iter().map(|h| h.join().unwrap_or(EXIT_CONFIG)).collect()
        })
    } else {
        jobs.iter().map(run_one).collect()
    };
    Ok(codes.into_iter().max().unwrap_or(EXIT_OK))
}
