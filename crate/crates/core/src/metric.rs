//! Rotationally symmetric Kähler metrics on the sphere in conformal gauge:
//! g = e^{2u} g_round with u = u(ξ).

use crate::error::{CoreError, Result};
use crate::grid::LatitudeGrid;
use std::f64::consts::PI;
use std::sync::Arc;

/// Conformal factor below this at any node counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Debug)]
struct MetricData {
    u: Vec<f64>,
    u_xi: Vec<f64>,
    e2u: Vec<f64>,
    em2u: Vec<f64>,
    eu: Vec<f64>,
    area: f64,
}

/// S¹-symmetric metric g = e^{2u} g_round.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    grid: LatitudeGrid,
    data: Arc<MetricData>,
}

impl ConformalMetric {
    /// Build a metric and renormalize the area to 4π (the class normalization).
    pub fn new(grid: LatitudeGrid, u: Vec<f64>) -> Result<Self> {
        let raw = ConformalMetric::with_raw_area(grid, u)?;
        let shift = 0.5 * (raw.area() / (4.0 * PI)).ln();
        if shift.abs() < 1e-15 {
            return Ok(raw);
        }
        let u: Vec<f64> = raw.u().iter().map(|v| v - shift).collect();
        ConformalMetric::with_raw_area(raw.grid.clone(), u)
    }

    /// Build a metric without area renormalization. Used when leaving the
    /// class deliberately (e.g. scaling experiments g ↦ c g).
    pub fn with_raw_area(grid: LatitudeGrid, u: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if u.len() != n {
            return Err(CoreError::InvalidInput(format!(
                "conformal factor length {} does not match grid size {}",
                u.len(),
                n
            )));
        }
        if !u.iter().all(|v| v.is_finite()) {
            return Err(CoreError::DegenerateMetric("non-finite conformal factor".into()));
        }
        let e2u: Vec<f64> = u.iter().map(|v| (2.0 * v).exp()).collect();
        if let Some((i, &bad)) = e2u.iter().enumerate().find(|(_, &v)| v < DEGENERACY_FLOOR) {
            return Err(CoreError::DegenerateMetric(format!(
                "e^(2u) = {bad:.3e} below floor at node {i}"
            )));
        }
        let mut u_xi = vec![0.0; n];
        grid.dxi_even(&u, &mut u_xi);

        // pole regularity: the one-sided derivative must extrapolate to zero
        let d0 = 1.5 * u_xi[0] - 0.5 * u_xi[1];
        let dpi = 1.5 * u_xi[n - 1] - 0.5 * u_xi[n - 2];
        let scale = 1.0 + u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = pole_tolerance(n) * scale;
        if d0.abs() > tol || dpi.abs() > tol {
            return Err(CoreError::InvalidInput(format!(
                "pole regularity violated: |u'(0)| ~ {:.3e}, |u'(pi)| ~ {:.3e}, tol {:.3e}",
                d0.abs(),
                dpi.abs(),
                tol
            )));
        }

        let em2u: Vec<f64> = u.iter().map(|v| (-2.0 * v).exp()).collect();
        let eu: Vec<f64> = u.iter().map(|v| v.exp()).collect();
        let area = e2u
            .iter()
            .zip(grid.weights())
            .map(|(e, w)| e * w)
            .sum();

        Ok(ConformalMetric {
            grid,
            data: Arc::new(MetricData { u, u_xi, e2u, em2u, eu, area }),
        })
    }

    /// The round metric (u = 0).
    pub fn round(grid: LatitudeGrid) -> Self {
        let n = grid.len();
        ConformalMetric::with_raw_area(grid, vec![0.0; n]).expect("round metric is valid")
    }

    pub fn grid(&self) -> &LatitudeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.data.u
    }

    pub fn u_xi(&self) -> &[f64] {
        &self.data.u_xi
    }

    pub fn e2u(&self) -> &[f64] {
        &self.data.e2u
    }

    pub fn em2u(&self) -> &[f64] {
        &self.data.em2u
    }

    pub fn eu(&self) -> &[f64] {
        &self.data.eu
    }

    /// Total area ∫ e^{2u} dA_round.
    pub fn area(&self) -> f64 {
        self.data.area
    }

    /// ∫ f ω with ω the metric volume form.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter()
            .zip(&self.data.e2u)
            .zip(self.grid.weights())
            .map(|((v, e), w)| v * e * w)
            .sum()
    }

    /// Mean of f against ω.
    pub fn mean(&self, f: &[f64]) -> f64 {
        self.integrate(f) / self.data.area
    }
}

/// Tolerance for the pole-regularity extrapolation check. Spectrally smooth
/// data sits far below this; kinked or noisy data lands well above.
pub fn pole_tolerance(n: usize) -> f64 {
    200.0 / (n as f64 * n as f64)
}
