//! Metric/complex-structure compatibility validators: the Hermitian defect
//! g - Jᵀ g J, the Christoffel difference tensor of two metrics sharing a
//! reference connection, and the first-order relation ∇J = H ⋆ J on the
//! latitude grid.

use crate::error::{CoreError, Result};
use crate::grid::LatitudeGrid;
use nalgebra::{DMatrix, SymmetricEigen};

/// Pointwise symmetric positive-definite real metric.
#[derive(Debug, Clone)]
pub struct RealMetricTensor {
    mat: DMatrix<f64>,
}

impl RealMetricTensor {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(CoreError::InvalidInput("metric matrix must be square".into()));
        }
        let scale = 1.0 + mat.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let asym = (&mat - mat.transpose()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if asym > 1e-12 * scale {
            return Err(CoreError::InvalidInput(format!(
                "metric not symmetric: defect {asym:.3e}"
            )));
        }
        let sym = 0.5 * (&mat + mat.transpose());
        let eig = SymmetricEigen::new(sym.clone());
        if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
            return Err(CoreError::InvalidInput("metric not positive definite".into()));
        }
        Ok(RealMetricTensor { mat: sym })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

/// Pointwise almost-complex tensor J with J² = -I.
#[derive(Debug, Clone)]
pub struct AlmostComplexTensor {
    mat: DMatrix<f64>,
}

impl AlmostComplexTensor {
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(CoreError::InvalidInput("J must be square".into()));
        }
        let n = mat.nrows();
        let sq = &mat * &mat;
        let defect = (&sq + DMatrix::<f64>::identity(n, n))
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale = 1.0 + mat.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if defect > 1e-12 * scale * scale {
            return Err(CoreError::InvalidInput(format!(
                "J² + I has defect {defect:.3e}"
            )));
        }
        Ok(AlmostComplexTensor { mat })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }
}

/// Sup-norm of the compatibility defect g - Jᵀ g J; zero iff g is Hermitian
/// for J.
pub fn hermitian_compat_residual(g: &RealMetricTensor, j: &AlmostComplexTensor) -> Result<f64> {
    if g.dim() != j.dim() {
        return Err(CoreError::InvalidInput(format!(
            "dimension mismatch: g is {}x{}, J is {}x{}",
            g.dim(),
            g.dim(),
            j.dim(),
            j.dim()
        )));
    }
    let defect = g.matrix() - j.matrix().transpose() * g.matrix() * j.matrix();
    Ok(defect.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// Rotationally symmetric 2x2 metric field on the latitude grid in (ξ, θ)
/// coordinates; components depend on ξ only.
#[derive(Debug, Clone)]
pub struct MetricFieldS1 {
    grid: LatitudeGrid,
    /// Per node: [[g_ξξ, g_ξθ], [g_ξθ, g_θθ]].
    values: Vec<[[f64; 2]; 2]>,
}

impl MetricFieldS1 {
    pub fn new(grid: LatitudeGrid, values: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::InvalidInput("field length mismatch".into()));
        }
        for (i, m) in values.iter().enumerate() {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if !(det > 0.0) || !(m[0][0] > 0.0) {
                return Err(CoreError::InvalidInput(format!(
                    "metric field not positive definite at node {i}"
                )));
            }
            if (m[0][1] - m[1][0]).abs() > 1e-12 * (1.0 + m[0][0].abs().max(m[1][1].abs())) {
                return Err(CoreError::InvalidInput(format!(
                    "metric field not symmetric at node {i}"
                )));
            }
        }
        Ok(MetricFieldS1 { grid, values })
    }

    /// The conformal metric e^{2u} g_round as a coordinate field.
    pub fn conformal(grid: LatitudeGrid, u: &[f64]) -> Result<Self> {
        let values = grid
            .nodes()
            .iter()
            .zip(u)
            .map(|(&xi, &ui)| {
                let e = (2.0 * ui).exp();
                [[e, 0.0], [0.0, e * xi.sin() * xi.sin()]]
            })
            .collect();
        MetricFieldS1::new(grid, values)
    }

    pub fn grid(&self) -> &LatitudeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[[[f64; 2]; 2]] {
        &self.values
    }

    /// ξ-derivatives of the components: (ξξ, θθ) even, (ξθ) odd.
    fn dxi(&self) -> Vec<[[f64; 2]; 2]> {
        let n = self.grid.len();
        let comp = |f: &dyn Fn(&[[f64; 2]; 2]) -> f64| -> Vec<f64> {
            self.values.iter().map(f).collect()
        };
        let gxx = comp(&|m| m[0][0]);
        let gxt = comp(&|m| m[0][1]);
        let gtt = comp(&|m| m[1][1]);
        let mut dxx = vec![0.0; n];
        let mut dxt = vec![0.0; n];
        let mut dtt = vec![0.0; n];
        self.grid.dxi_even(&gxx, &mut dxx);
        self.grid.dxi_odd(&gxt, &mut dxt);
        self.grid.dxi_even(&gtt, &mut dtt);
        (0..n)
            .map(|i| [[dxx[i], dxt[i]], [dxt[i], dtt[i]]])
            .collect()
    }

    /// Christoffel symbols Γ^c_{ab} per node (θ-independent components).
    fn christoffels(&self) -> Vec<[[[f64; 2]; 2]; 2]> {
        let n = self.grid.len();
        let d = self.dxi();
        (0..n)
            .map(|i| {
                let g = &self.values[i];
                let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
                let inv = [
                    [g[1][1] / det, -g[0][1] / det],
                    [-g[1][0] / det, g[0][0] / det],
                ];
                // ∂_a g_{bc}: ∂_ξ from the field, ∂_θ = 0
                let dg = |a: usize, b: usize, c: usize| if a == 0 { d[i][b][c] } else { 0.0 };
                let mut gamma = [[[0.0; 2]; 2]; 2];
                for c in 0..2 {
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut acc = 0.0;
                            for k in 0..2 {
                                acc += inv[c][k] * (dg(a, k, b) + dg(b, k, a) - dg(k, a, b));
                            }
                            gamma[c][a][b] = 0.5 * acc;
                        }
                    }
                }
                gamma
            })
            .collect()
    }
}

#[doc(hidden)]
pub fn debug_christoffels(g: &MetricFieldS1) -> Vec<[[[f64; 2]; 2]; 2]> {
    g.christoffels()
}

/// Per-node connection-difference tensor H^p_{ij}.
#[derive(Debug, Clone)]
pub struct ChristoffelDifference {
    grid: LatitudeGrid,
    values: Vec<[[[f64; 2]; 2]; 2]>,
}

impl ChristoffelDifference {
    pub fn grid(&self) -> &LatitudeGrid {
        &self.grid
    }

    /// H^p_{ij} at node `i`, indexed [p][i][j].
    pub fn values(&self) -> &[[[[f64; 2]; 2]; 2]] {
        &self.values
    }
}

/// H^p_{ij} = (1/2) g^{pk} [∇ref_j g_{ki} + ∇ref_i g_{jk} - ∇ref_k g_{ij}],
/// the difference Γ(g) - Γ(g_ref) expressed through the reference connection.
pub fn christoffel_difference(
    g_ref: &MetricFieldS1,
    g: &MetricFieldS1,
) -> Result<ChristoffelDifference> {
    if g_ref.grid() != g.grid() {
        return Err(CoreError::InvalidInput("metric fields on different grids".into()));
    }
    let grid = g.grid().clone();
    let n = grid.len();
    let gamma_ref = g_ref.christoffels();
    let dg = g.dxi();

    let values = (0..n)
        .map(|i| {
            let gv = &g.values()[i];
            let det = gv[0][0] * gv[1][1] - gv[0][1] * gv[1][0];
            let inv = [
                [gv[1][1] / det, -gv[0][1] / det],
                [-gv[1][0] / det, gv[0][0] / det],
            ];
            // ∇ref_a g_{bc} = ∂_a g_{bc} - Γref^d_{ab} g_{dc} - Γref^d_{ac} g_{bd}
            let nabla = |a: usize, b: usize, c: usize| -> f64 {
                let partial = if a == 0 { dg[i][b][c] } else { 0.0 };
                let mut corr = 0.0;
                for d in 0..2 {
                    corr += gamma_ref[i][d][a][b] * gv[d][c] + gamma_ref[i][d][a][c] * gv[b][d];
                }
                partial - corr
            };
            let mut h = [[[0.0; 2]; 2]; 2];
            for p in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let mut acc = 0.0;
                        for k in 0..2 {
                            acc += inv[p][k] * (nabla(b, k, a) + nabla(a, b, k) - nabla(k, a, b));
                        }
                        h[p][a][b] = 0.5 * acc;
                    }
                }
            }
            h
        })
        .collect();
    Ok(ChristoffelDifference { grid, values })
}

/// Residual of ∇ref J = H ⋆ J over the grid, measured in the orthonormal
/// frame of the reference metric so that pole coordinate singularities do
/// not inflate the norm. J is the standard rotation complex structure of the
/// (ξ, θ)-sphere, shared by every rotationally symmetric conformal metric.
pub fn nabla_j_relation_residual(g_ref: &MetricFieldS1, g: &MetricFieldS1) -> Result<f64> {
    if g_ref.grid() != g.grid() {
        return Err(CoreError::InvalidInput("metric fields on different grids".into()));
    }
    let grid = g.grid().clone();
    let n = grid.len();
    let gamma_ref = g_ref.christoffels();
    let h = christoffel_difference(g_ref, g)?;

    let mut worst = 0.0_f64;
    for i in 0..n {
        let xi = grid.nodes()[i];
        let (s, c) = (xi.sin(), xi.cos());
        // J^θ_ξ = 1/sin ξ, J^ξ_θ = -sin ξ, with exact ξ-derivatives
        let j = [[0.0, -s], [1.0 / s, 0.0]];
        let dj = [[0.0, -c], [-c / (s * s), 0.0]];

        // frame scales of g_ref: s_ξ = sqrt(g_ξξ), s_θ = sqrt(g_θθ)
        let gr = &g_ref.values()[i];
        let scale = [gr[0][0].sqrt(), gr[1][1].sqrt()];

        for b in 0..2 {
            for a in 0..2 {
                for cix in 0..2 {
                    // (∇ref_a J)^b_c = ∂_a J^b_c + Γref^b_{ad} J^d_c - Γref^d_{ac} J^b_d
                    let partial = if a == 0 { dj[b][cix] } else { 0.0 };
                    let mut nab = partial;
                    for d in 0..2 {
                        nab += gamma_ref[i][b][a][d] * j[d][cix]
                            - gamma_ref[i][d][a][cix] * j[b][d];
                    }
                    // (H ⋆ J)^b_{ac} = H^b_{ad} J^d_c - H^d_{ac} J^b_d
                    let mut star = 0.0;
                    for d in 0..2 {
                        star += h.values()[i][b][a][d] * j[d][cix]
                            - h.values()[i][d][a][cix] * j[b][d];
                    }
                    let frame = scale[a] * scale[cix] / scale[b];
                    worst = worst.max(((nab - star) * frame).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// ‖J‖² under full metric contraction, per node; 2n for a compatible pair
/// in real index convention.
pub fn j_norm_sq(g: &MetricFieldS1) -> Vec<f64> {
    let grid = g.grid();
    g.values()
        .iter()
        .zip(grid.nodes())
        .map(|(gv, &xi)| {
            let s = xi.sin();
            let j = [[0.0, -s], [1.0 / s, 0.0]];
            let det = gv[0][0] * gv[1][1] - gv[0][1] * gv[1][0];
            let inv = [
                [gv[1][1] / det, -gv[0][1] / det],
                [-gv[1][0] / det, gv[0][0] / det],
            ];
            let mut acc = 0.0;
            for b in 0..2 {
                for a in 0..2 {
                    for d in 0..2 {
                        for c in 0..2 {
                            acc += j[b][a] * j[d][c] * gv[b][d] * inv[a][c];
                        }
                    }
                }
            }
            acc
        })
        .collect()
}


#[cfg(test)]
mod reflection_tests {
    use super::*;

    #[test]
    fn christoffel_difference_detects_distinct_connections() {
        // fields related by the reflection ξ -> π - ξ have different
        // connections node by node, so H must not vanish
        let grid = LatitudeGrid::new(64).unwrap();
        let u: Vec<f64> = grid.cos_xi().iter().map(|c| 0.1 * c + 0.05 * c * c).collect();
        let reflected: Vec<f64> = u.iter().rev().copied().collect();
        let g = MetricFieldS1::conformal(grid.clone(), &u).unwrap();
        let gr = MetricFieldS1::conformal(grid, &reflected).unwrap();
        let h = christoffel_difference(&gr, &g).unwrap();
        let worst = h
            .values()
            .iter()
            .flat_map(|m| m.iter().flatten().flatten())
            .fold(0.0_f64, |acc, &v| acc.max(v.abs()));
        assert!(worst > 1e-2, "H unexpectedly small: {worst:e}");
    }
}
