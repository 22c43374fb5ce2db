//! Scalar observables along the flow: gradient energy Y and its higher
//! variants Y_{r,s}, the path-integrated Mabuchi energy, the Futaki pairing,
//! and residuals of the evolution identities that drive the convergence
//! argument.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::flow::{consecutive_snapshots, Trajectory};
use crate::geometry::{derivative_stack, gauss_curvature, l2_norm_sq, laplacian, ricci_potential};
use crate::metric::ConformalMetric;
use crate::spectral::{self, SectorVectorField};
use num_complex::Complex64;

/// Per-record scalar observables.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Y = ∫ |∇h|² ω, also the (1,0) entry of the Y_{r,s} family.
    pub y: f64,
    /// ∫ |∇∇̄h|² ω.
    pub y11: f64,
    /// ∫ |∇̄∇̄h|² ω.
    pub y20: f64,
    /// Mabuchi energy by path quadrature, ν(0) = 0.
    pub nu: f64,
    /// Futaki pairing of the holomorphic projection of ∇h.
    pub futaki: f64,
    /// Lowest positive del-bar eigenvalue; see `lambda_fresh`.
    pub lambda_min: f64,
    /// Whether `lambda_min` was solved at this record or carried forward.
    pub lambda_fresh: bool,
    pub sup_gdot: f64,
    pub area: f64,
    /// ∫ |∇h|² |R-μ| ω, consumed by the key-inequality check.
    pub grad_curv_int: f64,
}

/// Compute the record scalars for one metric. ν is left at zero; the caller
/// accumulates it along the run.
pub fn diagnostics(
    m: &ConformalMetric,
    t: f64,
    lambda_min: f64,
    lambda_fresh: bool,
) -> Result<DiagnosticsRecord> {
    let (h, mu) = ricci_potential(m)?;
    let r = gauss_curvature(m)?;
    let grad_stack = derivative_stack(m, &h, 1, 0)?;
    let y = l2_norm_sq(m, &grad_stack)?;
    let y11 = l2_norm_sq(m, &derivative_stack(m, &h, 1, 1)?)?;
    let y20 = l2_norm_sq(m, &derivative_stack(m, &h, 2, 0)?)?;
    let grad = spectral::grad_potential_field(m, &h)?;
    let proj = spectral::project_holo(m, &grad)?;
    let futaki = futaki_unchecked(m, &h, &proj).re;
    let sup_gdot = r
        .values()
        .iter()
        .fold(0.0_f64, |acc, &v| acc.max((v - mu).abs()));
    let weighted: Vec<f64> = grad_stack
        .profile()
        .iter()
        .zip(r.values())
        .map(|(g, rv)| g * g * (rv - mu).abs())
        .collect();
    let grad_curv_int = m.integrate(&weighted);
    Ok(DiagnosticsRecord {
        t,
        y,
        y11,
        y20,
        nu: 0.0,
        futaki,
        lambda_min,
        lambda_fresh,
        sup_gdot,
        area: m.area(),
        grad_curv_int,
    })
}

/// Mabuchi energy series ν(t_k) = -(1/V) ∫₀^{t_k} Y dt by trapezoid over the
/// recorded diagnostics; ν(0) = 0 and the series is non-increasing.
pub fn mabuchi_path(traj: &Trajectory) -> Result<Vec<f64>> {
    let recs = &traj.records;
    if recs.is_empty() || recs.iter().any(|r| !r.y.is_finite()) {
        return Err(CoreError::InvalidInput("missing or non-finite Y value".into()));
    }
    let mut out = Vec::with_capacity(recs.len());
    let mut nu = 0.0;
    out.push(0.0);
    for w in recs.windows(2) {
        nu -= 0.5 * (w[1].t - w[0].t) * (w[0].y + w[1].y) / w[1].area;
        out.push(nu);
    }
    Ok(out)
}

/// Futaki pairing Fut(W) = ∫ (W h) ω with h the Ricci potential of m.
/// Requires W discretely holomorphic: ‖∂̄W‖/‖W‖ < 1e-8.
pub fn futaki(m: &ConformalMetric, w: &SectorVectorField) -> Result<Complex64> {
    let energy = spectral::dbar_energy(m, w)?;
    let norm = spectral::field_norm_sq(m, w)?;
    if norm > 0.0 && (energy / norm).sqrt() >= 1e-8 {
        return Err(CoreError::InvalidInput(format!(
            "field is not holomorphic: |dbar W|/|W| = {:.3e}",
            (energy / norm).sqrt()
        )));
    }
    let (h, _) = ricci_potential(m)?;
    Ok(futaki_unchecked(m, &h, w))
}

/// The pairing itself; the θ-integral kills every sector but 0.
pub(crate) fn futaki_unchecked(
    m: &ConformalMetric,
    h: &ScalarField,
    w: &SectorVectorField,
) -> Complex64 {
    if w.sector() != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = m.len();
    let grid = m.grid();
    let mut hxi = vec![0.0; n];
    grid.dxi_even(h.values(), &mut hxi);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let wh = w.profile()[i] * (hxi[i] / m.eu()[i] * std::f64::consts::FRAC_1_SQRT_2);
        acc += wh * m.e2u()[i] * grid.weights()[i];
    }
    acc
}

/// Y_{r,s} = ∫ |∇^s ∇̄^r h|² ω for the Ricci potential of m.
pub fn y_rs(m: &ConformalMetric, r: usize, s: usize) -> Result<f64> {
    let (h, _) = ricci_potential(m)?;
    let stack = derivative_stack(m, &h, r, s)?;
    l2_norm_sq(m, &stack)
}

/// ∫ |∇f|² ω for a symmetric scalar field.
pub fn grad_energy(m: &ConformalMetric, f: &ScalarField) -> f64 {
    let n = m.len();
    let mut fxi = vec![0.0; n];
    m.grid().dxi_even(f.values(), &mut fxi);
    0.5 * m
        .grid()
        .weights()
        .iter()
        .zip(&fxi)
        .map(|(w, d)| w * d * d)
        .sum::<f64>()
}

/// Which sign of the volume-form evolution the Ẏ identity is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureSign {
    /// (ω)˙ = (-R + μ)ω; the trace of the metric flow forces this one.
    Adopted,
    /// The opposite sign, kept for the numerical adjudication test.
    Flipped,
}

/// Residual series of the Ẏ identity over interior snapshots: Ẏ from
/// centered differences against
///   -∫|∇h|²(R-μ)ω - ∫∇h·∇̄h (Ric - μg) ω - 2∫|∇̄∇̄h|²ω,
/// whose two middle terms coincide in complex dimension one.
pub fn y_dot_residual(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    y_dot_residual_signed(traj, MeasureSign::Adopted)
}

pub fn y_dot_residual_signed(traj: &Trajectory, sign: MeasureSign) -> Result<Vec<(f64, f64)>> {
    let (snaps, dt) = consecutive_snapshots(traj, 3)?;
    let grid = traj.final_state.metric.grid().clone();

    let mut ys = Vec::with_capacity(snaps.len());
    let mut rhss = Vec::with_capacity(snaps.len());
    for s in snaps {
        let m = ConformalMetric::with_raw_area(grid.clone(), s.u.clone())?;
        let (h, mu) = ricci_potential(&m)?;
        let r = gauss_curvature(&m)?;
        let grad = derivative_stack(&m, &h, 1, 0)?;
        let y = l2_norm_sq(&m, &grad)?;
        let y20 = l2_norm_sq(&m, &derivative_stack(&m, &h, 2, 0)?)?;
        let weighted: Vec<f64> = grad
            .profile()
            .iter()
            .zip(r.values())
            .map(|(g, rv)| g * g * (rv - mu))
            .collect();
        let grad_curv = m.integrate(&weighted);
        let rhs = match sign {
            MeasureSign::Adopted => -2.0 * grad_curv - 2.0 * y20,
            MeasureSign::Flipped => -2.0 * y20,
        };
        ys.push(y);
        rhss.push(rhs);
    }

    let mut out = Vec::new();
    for k in 1..ys.len() - 1 {
        let ydot = (ys[k + 1] - ys[k - 1]) / (2.0 * dt);
        out.push((snaps[k].t, (ydot - rhss[k]).abs()));
    }
    Ok(out)
}

/// Residual series of the integrated |Δh|² evolution identity
///   d/dt ∫(Δh)²ω = -2∫|∇Δh|²ω + ∫(Δh)³ω + 2μ∫(Δh)²ω
/// over interior snapshots.
pub fn delta_h_flow_residual(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let (snaps, dt) = consecutive_snapshots(traj, 3)?;
    let grid = traj.final_state.metric.grid().clone();

    let mut zs = Vec::with_capacity(snaps.len());
    let mut rhss = Vec::with_capacity(snaps.len());
    for s in snaps {
        let m = ConformalMetric::with_raw_area(grid.clone(), s.u.clone())?;
        let (h, mu) = ricci_potential(&m)?;
        let lh = laplacian(&m, &h)?;
        let sq: Vec<f64> = lh.values().iter().map(|v| v * v).collect();
        let cb: Vec<f64> = lh.values().iter().map(|v| v * v * v).collect();
        let z = m.integrate(&sq);
        let rhs = -2.0 * grad_energy(&m, &lh) + m.integrate(&cb) + 2.0 * mu * z;
        zs.push(z);
        rhss.push(rhs);
    }

    let mut out = Vec::new();
    for k in 1..zs.len() - 1 {
        let zdot = (zs[k + 1] - zs[k - 1]) / (2.0 * dt);
        out.push((snaps[k].t, (zdot - rhss[k]).abs()));
    }
    Ok(out)
}
