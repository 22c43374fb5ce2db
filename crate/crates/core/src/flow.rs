//! Time integration of the normalized Ricci flow in conformal gauge.
//!
//! The flow ġ = -Ric + μg reduces on g = e^{2u} g_round to u̇ = (μ - R(u))/2
//! with μ the mean curvature. μ is recomputed from the current metric at
//! every stage, which makes the total area an exact invariant of the
//! semi-discrete system; the round metric is a fixed point.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::functionals::{self, DiagnosticsRecord};
use crate::geometry::{laplacian, ricci_potential};
use crate::grid::LatitudeGrid;
use crate::metric::{ConformalMetric, DEGENERACY_FLOOR};
use crate::spectral;
use std::f64::consts::PI;

/// RK4 real-axis stability bound |z| <= 2.785.
const RK4_STABILITY: f64 = 2.785;

/// Run configuration for the core engine.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Grid size.
    pub n: usize,
    /// Initial data u0 = amplitude * P(cos ξ).
    pub amplitude: f64,
    /// Coefficients of P, lowest degree first.
    pub poly: Vec<f64>,
    pub t_end: f64,
    /// CFL constant: dt = cfl * (π/N)² * min e^{2u}.
    pub cfl: f64,
    /// Diagnostics record spacing in flow time.
    pub cadence: f64,
    /// Stop when sup |ġ| falls below this.
    pub convergence_tol: f64,
    /// Optional block of consecutive-step full states for residual studies.
    pub snapshot_window: Option<SnapshotWindow>,
    /// Solve the del-bar spectrum every k-th record (0 disables).
    pub spectrum_every: usize,
    /// Fourier sector cap for spectrum solves.
    pub sector_cap: i32,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            n: 64,
            amplitude: 0.05,
            poly: vec![0.0, 0.0, 1.0],
            t_end: 5.0,
            cfl: 0.2,
            cadence: 0.1,
            convergence_tol: 1e-9,
            snapshot_window: None,
            spectrum_every: 10,
            sector_cap: 8,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SnapshotWindow {
    pub t_start: f64,
    pub count: usize,
    /// Steps between snapshots; the residual time differences use the
    /// spacing stride * dt.
    pub stride: u64,
}

impl SnapshotWindow {
    pub fn new(t_start: f64, count: usize) -> Self {
        SnapshotWindow { t_start, count, stride: 1 }
    }
}

/// Full flow state at one time.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub metric: ConformalMetric,
    pub h: ScalarField,
    pub mu: f64,
    pub step_index: u64,
}

impl FlowState {
    pub fn new(metric: ConformalMetric, t: f64, step_index: u64) -> Result<Self> {
        let (h, mu) = ricci_potential(&metric)?;
        Ok(FlowState { t, metric, h, mu, step_index })
    }
}

/// Conformal factor samples of one integrator step.
#[derive(Debug, Clone)]
pub struct StepSnapshot {
    pub step_index: u64,
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Converged { t: f64 },
    ReachedEnd,
    BlewUp { t: f64, reason: String },
}

/// Recorded run: diagnostics series, optional consecutive-step snapshots,
/// and the data for the metric-equivalence report.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: FlowConfig,
    pub dt: f64,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<StepSnapshot>,
    /// (min, max) over nodes and record times of e^{2u(t)} / e^{2u(0)}.
    pub conformal_ratio: (f64, f64),
    pub outcome: Outcome,
    pub final_state: FlowState,
}

impl Trajectory {
    pub fn converged(&self) -> bool {
        matches!(self.outcome, Outcome::Converged { .. })
    }
}

/// Initial metric of the configured perturbation family, area-normalized.
pub fn initial_metric(grid: LatitudeGrid, amplitude: f64, poly: &[f64]) -> Result<ConformalMetric> {
    let u: Vec<f64> = grid
        .cos_xi()
        .iter()
        .map(|&x| {
            let mut p = 0.0;
            for &c in poly.iter().rev() {
                p = p * x + c;
            }
            amplitude * p
        })
        .collect();
    ConformalMetric::new(grid, u)
}

/// Explicit stability limit for the current metric.
pub fn stability_limit(m: &ConformalMetric) -> f64 {
    let n = m.len() as f64;
    let lmax = n - 1.0;
    let fastest = 0.5 * lmax * (lmax + 1.0) * m.em2u().iter().fold(0.0_f64, |a, &b| a.max(b));
    RK4_STABILITY / fastest
}

/// Default CFL time step for a metric.
pub fn cfl_step(m: &ConformalMetric, cfl: f64) -> f64 {
    let dxi = PI / m.len() as f64;
    let emin = m.e2u().iter().fold(f64::INFINITY, |a, &b| a.min(b));
    cfl * dxi * dxi * emin
}

/// One RK4 step of the public flow-state contract: advances the metric and
/// re-solves the Ricci potential.
pub fn flow_step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0) {
        return Err(CoreError::InvalidInput(format!("dt = {dt} must be positive")));
    }
    let limit = stability_limit(&state.metric);
    if dt > limit {
        return Err(CoreError::StepSize { dt, limit });
    }
    let grid = state.metric.grid().clone();
    let mut stepper = Stepper::new(grid.clone());
    let mut u = state.metric.u().to_vec();
    stepper
        .rk4(&mut u, dt)
        .map_err(|reason| CoreError::BlowUp { t: state.t, reason })?;
    let metric = ConformalMetric::with_raw_area(grid, u)?;
    let drift = (metric.area() - state.metric.area()).abs();
    if drift > 1e-9 {
        return Err(CoreError::Numerical(format!("area drift {drift:.3e} in one step")));
    }
    FlowState::new(metric, state.t + dt, state.step_index + 1)
}

/// Integrate the flow per the configuration.
pub fn run_flow(config: &FlowConfig) -> Result<Trajectory> {
    validate_config(config)?;
    let grid = LatitudeGrid::new(config.n)?;
    let m0 = initial_metric(grid.clone(), config.amplitude, &config.poly)?;
    let dt = cfl_step(&m0, config.cfl).min(0.95 * stability_limit(&m0));

    let mut stepper = Stepper::new(grid.clone());
    let mut u = m0.u().to_vec();
    let e2u0 = m0.e2u().to_vec();

    let mut records: Vec<DiagnosticsRecord> = Vec::new();
    let mut snapshots: Vec<StepSnapshot> = Vec::new();
    let mut ratio_min = 1.0_f64;
    let mut ratio_max = 1.0_f64;
    let mut lambda_last = f64::NAN;
    let mut outcome = Outcome::ReachedEnd;

    let n_steps = (config.t_end / dt).ceil() as u64;
    let mut next_record = 0.0_f64;
    let mut record_count: usize = 0;

    let mut step: u64 = 0;
    loop {
        let t = step as f64 * dt;
        let at_end = step >= n_steps;

        let due = t + 0.5 * dt >= next_record;
        let end_record = at_end
            && records
                .last()
                .map_or(true, |r: &DiagnosticsRecord| t - r.t >= 0.25 * config.cadence);
        if due || end_record {
            let metric = ConformalMetric::with_raw_area(grid.clone(), u.clone())?;
            let fresh = config.spectrum_every > 0
                && (record_count % config.spectrum_every == 0 || at_end);
            let lambda = if fresh {
                let rep = spectral::lambda_min(&metric, config.sector_cap)?;
                lambda_last = rep.lambda_min;
                rep.lambda_min
            } else {
                lambda_last
            };
            let mut rec = functionals::diagnostics(&metric, t, lambda, fresh)?;
            if let Some(prev) = records.last() {
                rec.nu = prev.nu - 0.5 * (t - prev.t) * (rec.y + prev.y) / metric.area();
            }
            for (i, &e0) in e2u0.iter().enumerate() {
                let ratio = metric.e2u()[i] / e0;
                ratio_min = ratio_min.min(ratio);
                ratio_max = ratio_max.max(ratio);
            }
            let sup_gdot = rec.sup_gdot;
            records.push(rec);
            record_count += 1;
            while next_record <= t + 0.5 * dt {
                next_record += config.cadence;
            }
            if sup_gdot < config.convergence_tol {
                outcome = Outcome::Converged { t };
                break;
            }
        } else if step % 16 == 0 && stepper.sup_gdot(&u) < config.convergence_tol {
            let metric = ConformalMetric::with_raw_area(grid.clone(), u.clone())?;
            let rep = spectral::lambda_min(&metric, config.sector_cap)?;
            lambda_last = rep.lambda_min;
            let mut rec = functionals::diagnostics(&metric, t, lambda_last, true)?;
            if let Some(prev) = records.last() {
                rec.nu = prev.nu - 0.5 * (t - prev.t) * (rec.y + prev.y) / metric.area();
            }
            records.push(rec);
            outcome = Outcome::Converged { t };
            break;
        }

        if let Some(w) = config.snapshot_window {
            let due = match snapshots.last() {
                None => t >= w.t_start,
                Some(prev) => step == prev.step_index + w.stride.max(1),
            };
            if due && snapshots.len() < w.count {
                snapshots.push(StepSnapshot { step_index: step, t, u: u.clone() });
            }
        }

        if at_end {
            break;
        }

        if let Err(reason) = stepper.rk4(&mut u, dt) {
            outcome = Outcome::BlewUp { t, reason };
            break;
        }
        step += 1;
    }

    let final_metric = ConformalMetric::with_raw_area(grid, u)?;
    let final_state = FlowState::new(final_metric, step as f64 * dt, step)?;
    Ok(Trajectory {
        config: config.clone(),
        dt,
        records,
        snapshots,
        conformal_ratio: (ratio_min, ratio_max),
        outcome,
        final_state,
    })
}

fn validate_config(config: &FlowConfig) -> Result<()> {
    if config.n < 8 {
        return Err(CoreError::InvalidInput("grid size below 8".into()));
    }
    if !(config.cadence > 0.0) {
        return Err(CoreError::InvalidInput("cadence must be positive".into()));
    }
    if !(config.t_end > 0.0) || !(config.cfl > 0.0) {
        return Err(CoreError::InvalidInput("t_end and cfl must be positive".into()));
    }
    if config.amplitude.abs() >= 0.5 {
        return Err(CoreError::InvalidInput(format!(
            "perturbation amplitude {} too large",
            config.amplitude
        )));
    }
    Ok(())
}

/// Raw-array RK4 stepper for u̇ = (μ - R(u))/2.
struct Stepper {
    grid: LatitudeGrid,
    d0u: Vec<f64>,
    e2u: Vec<f64>,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Stepper {
    fn new(grid: LatitudeGrid) -> Self {
        let n = grid.len();
        Stepper {
            grid,
            d0u: vec![0.0; n],
            e2u: vec![0.0; n],
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
        }
    }

    /// u̇ into slot `which`; false on degeneracy.
    fn u_dot(&mut self, u: &[f64], which: usize) -> bool {
        let n = u.len();
        self.grid.delta0(u, &mut self.d0u);
        let w = self.grid.weights();
        let mut vol = 0.0;
        let mut qd = 0.0;
        for i in 0..n {
            let e = (2.0 * u[i]).exp();
            if !(e >= DEGENERACY_FLOOR) || !e.is_finite() {
                return false;
            }
            self.e2u[i] = e;
            vol += w[i] * e;
            qd += w[i] * self.d0u[i];
        }
        let mu = (4.0 * PI - qd) / vol;
        let out = &mut self.k[which];
        for i in 0..n {
            let r = (1.0 - self.d0u[i]) / self.e2u[i];
            out[i] = 0.5 * (mu - r);
        }
        true
    }

    fn rk4(&mut self, u: &mut [f64], dt: f64) -> std::result::Result<(), String> {
        let n = u.len();
        let fail = || "degenerate or non-finite metric during step".to_string();
        if !self.u_dot(u, 0) {
            return Err(fail());
        }
        for i in 0..n {
            self.stage[i] = u[i] + 0.5 * dt * self.k[0][i];
        }
        let stage = std::mem::take(&mut self.stage);
        let ok = self.u_dot(&stage, 1);
        self.stage = stage;
        if !ok {
            return Err(fail());
        }
        for i in 0..n {
            self.stage[i] = u[i] + 0.5 * dt * self.k[1][i];
        }
        let stage = std::mem::take(&mut self.stage);
        let ok = self.u_dot(&stage, 2);
        self.stage = stage;
        if !ok {
            return Err(fail());
        }
        for i in 0..n {
            self.stage[i] = u[i] + dt * self.k[2][i];
        }
        let stage = std::mem::take(&mut self.stage);
        let ok = self.u_dot(&stage, 3);
        self.stage = stage;
        if !ok {
            return Err(fail());
        }
        for i in 0..n {
            u[i] += dt / 6.0
                * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
            if !u[i].is_finite() {
                return Err(fail());
            }
        }
        Ok(())
    }

    /// sup |R - μ| for the convergence probe.
    fn sup_gdot(&mut self, u: &[f64]) -> f64 {
        if !self.u_dot(u, 0) {
            return f64::INFINITY;
        }
        self.k[0].iter().fold(0.0_f64, |m, &v| m.max(2.0 * v.abs()))
    }
}

/// Sup-norm residual of the potential flow identity ḣ = Δh + μh + c per
/// interior snapshot, with ḣ from centered time differences and c recovered
/// as the mean mismatch. Returns (t, residual) pairs.
pub fn h_flow_residual(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    h_flow_residual_signed(traj, 1.0)
}

/// Same residual with `sign` multiplying the (Δh + μh) combination; the
/// wrong sign must inflate the residual by an order of magnitude.
pub fn h_flow_residual_signed(traj: &Trajectory, sign: f64) -> Result<Vec<(f64, f64)>> {
    let (snaps, dt) = consecutive_snapshots(traj, 3)?;
    let grid = traj.final_state.metric.grid().clone();

    let mut states: Vec<(ConformalMetric, ScalarField, f64)> = Vec::with_capacity(snaps.len());
    for s in snaps {
        let m = ConformalMetric::with_raw_area(grid.clone(), s.u.clone())?;
        let (h, mu) = ricci_potential(&m)?;
        states.push((m, h, mu));
    }

    let mut out = Vec::new();
    for k in 1..states.len() - 1 {
        let (ref m, ref h, mu) = states[k];
        let lh = laplacian(m, h)?;
        let n = grid.len();
        let mut mismatch = vec![0.0; n];
        for i in 0..n {
            let hdot = (states[k + 1].1.values()[i] - states[k - 1].1.values()[i]) / (2.0 * dt);
            mismatch[i] = hdot - sign * (lh.values()[i] + mu * h.values()[i]);
        }
        let c = m.mean(&mismatch);
        let res = mismatch.iter().fold(0.0_f64, |acc, &v| acc.max((v - c).abs()));
        out.push((traj.snapshots[k].t, res));
    }
    Ok(out)
}

/// The snapshot block and its uniform time spacing stride * dt.
pub(crate) fn consecutive_snapshots(
    traj: &Trajectory,
    min: usize,
) -> Result<(&[StepSnapshot], f64)> {
    let snaps = &traj.snapshots;
    if snaps.len() < min {
        return Err(CoreError::InvalidInput(format!(
            "need at least {min} consecutive snapshots, have {}",
            snaps.len()
        )));
    }
    let stride = snaps[1].step_index - snaps[0].step_index;
    if stride == 0 || !snaps.windows(2).all(|w| w[1].step_index == w[0].step_index + stride) {
        return Err(CoreError::InvalidInput(
            "snapshots are not uniformly spaced consecutive states".into(),
        ));
    }
    Ok((snaps, stride as f64 * traj.dt))
}

/// Hamilton-style metric-equivalence data: ∫ sup|ġ| dt by trapezoid over
/// the records, the observed conformal-ratio extremes, and the check that
/// the ratios sit inside the exp(±∫) envelope.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub integral: f64,
    pub ratio_bounds: (f64, f64),
    pub envelope_ok: bool,
}

pub fn metric_equivalence_report(traj: &Trajectory) -> Result<EquivalenceReport> {
    if traj.records.is_empty() {
        return Err(CoreError::InvalidInput("empty trajectory".into()));
    }
    let integral = sup_gdot_integral(&traj.records);
    let (lo, hi) = traj.conformal_ratio;
    let slack = 1e-6;
    let envelope_ok =
        hi <= integral.exp() * (1.0 + slack) && lo >= (-integral).exp() / (1.0 + slack);
    Ok(EquivalenceReport { integral, ratio_bounds: (lo, hi), envelope_ok })
}

pub fn sup_gdot_integral(records: &[DiagnosticsRecord]) -> f64 {
    records
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].sup_gdot + w[1].sup_gdot))
        .sum()
}
