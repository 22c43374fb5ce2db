//! Rotationally symmetric scalar fields sampled on a latitude grid.

use crate::error::{CoreError, Result};
use crate::grid::LatitudeGrid;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: LatitudeGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: LatitudeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::InvalidInput(format!(
                "field length {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(CoreError::InvalidInput("non-finite field value".into()));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: LatitudeGrid) -> Self {
        let n = grid.len();
        ScalarField { grid, values: vec![0.0; n] }
    }

    /// Sample f(ξ) at the grid nodes.
    pub fn from_fn(grid: LatitudeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        ScalarField::new(grid, values)
    }

    pub fn grid(&self) -> &LatitudeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Linear extrapolation of the spectral ξ-derivative to a pole.
    /// Smooth symmetric fields have vanishing one-sided derivative there.
    pub fn pole_derivative_defect(&self) -> (f64, f64) {
        let n = self.grid.len();
        let mut d = vec![0.0; n];
        self.grid.dxi_even(&self.values, &mut d);
        // nodes are uniformly spaced at (i + 1/2)Δ: extrapolate with weights (3/2, -1/2)
        let at0 = 1.5 * d[0] - 0.5 * d[1];
        let atpi = 1.5 * d[n - 1] - 0.5 * d[n - 2];
        (at0.abs(), atpi.abs())
    }
}
