//! Differential geometry of conformal metrics g = e^{2u} g_round on the
//! sphere: curvature, the complex Laplacian, Poisson solves, the Ricci
//! potential, and covariant-derivative stacks in a unitary frame.
//!
//! Conventions. The round sphere is normalized to curvature R ≡ 1 and area
//! 4π. Δ denotes the complex Laplacian, which is half the Riemannian
//! Laplace–Beltrami operator; on symmetric fields Δ_g f = (1/2) e^{-2u} Δ₀ f.

use crate::error::{CoreError, Result};
use crate::field::ScalarField;
use crate::grid::LatitudeGrid;
use crate::metric::{pole_tolerance, ConformalMetric};

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gauss (= Kähler scalar) curvature of g: R = e^{-2u}(1 - Δ₀ u).
pub fn gauss_curvature(m: &ConformalMetric) -> Result<ScalarField> {
    let n = m.len();
    let mut d0u = vec![0.0; n];
    m.grid().delta0(m.u(), &mut d0u);
    let mut r = vec![0.0; n];
    for i in 0..n {
        r[i] = m.em2u()[i] * (1.0 - d0u[i]);
        if !r[i].is_finite() {
            return Err(CoreError::DegenerateMetric(format!(
                "non-finite curvature at node {i}"
            )));
        }
    }
    ScalarField::new(m.grid().clone(), r)
}

/// Complex Laplacian Δ_g f = (1/2) e^{-2u} Δ₀ f.
pub fn laplacian(m: &ConformalMetric, f: &ScalarField) -> Result<ScalarField> {
    check_same_grid(m, f)?;
    check_pole_regular(f)?;
    let n = m.len();
    let mut d0f = vec![0.0; n];
    m.grid().delta0(f.values(), &mut d0f);
    let vals = (0..n).map(|i| 0.5 * m.em2u()[i] * d0f[i]).collect();
    ScalarField::new(m.grid().clone(), vals)
}

/// Solve Δ_g h = rhs with ∫ h ω = 0. Requires ∫ rhs ω ≈ 0.
pub fn poisson_solve(m: &ConformalMetric, rhs: &ScalarField) -> Result<ScalarField> {
    check_same_grid(m, rhs)?;
    let n = m.len();
    let mean = m.mean(rhs.values());
    let scale = 1.0 + rhs.sup_norm();
    let tol = 1e-8 * scale;
    if mean.abs() > tol {
        return Err(CoreError::Unsolvable { mean: mean.abs() * m.area(), tol: tol * m.area() });
    }

    // Δ₀ h = 2 e^{2u} (rhs - mean); the subtraction makes the coefficient
    // system compatible to roundoff.
    let b: Vec<f64> = (0..n)
        .map(|i| 2.0 * m.e2u()[i] * (rhs.values()[i] - mean))
        .collect();
    let (coeffs, r0) = m.grid().delta0_solve_coeffs(&b);
    if !r0.is_finite() || r0.abs() > 1e-6 * (1.0 + scale) {
        return Err(CoreError::Numerical(format!(
            "Poisson compatibility residual {r0:.3e}"
        )));
    }
    let mut h = vec![0.0; n];
    m.grid().transforms().cos_eval(&coeffs, &mut h);
    let hmean = m.mean(&h);
    for v in &mut h {
        *v -= hmean;
    }
    ScalarField::new(m.grid().clone(), h)
}

/// Ricci potential: μ = ∫ R ω / V and h with Δ h = R - μ, ∫ h ω = 0.
pub fn ricci_potential(m: &ConformalMetric) -> Result<(ScalarField, f64)> {
    let r = gauss_curvature(m)?;
    let mu = m.integrate(r.values()) / m.area();
    let rhs_vals: Vec<f64> = r.values().iter().map(|v| v - mu).collect();
    let rhs = ScalarField::new(m.grid().clone(), rhs_vals)?;
    let h = poisson_solve(m, &rhs)?;
    Ok((h, mu))
}

/// Frame components of ∇^s ∇̄^r h along a meridian.
///
/// Built by repeated application of the unitary-frame covariant derivative:
/// with w the barred-minus-unbarred index count of the input,
///   ∇̄: t ↦ (e^{-u}/√2) (t_ξ - w (u_ξ + cot ξ) t),
///   ∇:  t ↦ (e^{-u}/√2) (t_ξ + w (u_ξ + cot ξ) t).
/// Barred derivatives are applied first. Profiles are real on the meridian;
/// the full component carries the phase e^{i(r-s)θ}.
#[derive(Debug, Clone)]
pub struct DerivativeStack {
    grid: LatitudeGrid,
    r: usize,
    s: usize,
    profile: Vec<f64>,
}

impl DerivativeStack {
    pub fn grid(&self) -> &LatitudeGrid {
        &self.grid
    }

    pub fn order(&self) -> (usize, usize) {
        (self.r, self.s)
    }

    /// Fourier winding of the frame component, r - s.
    pub fn winding(&self) -> i32 {
        self.r as i32 - self.s as i32
    }

    pub fn profile(&self) -> &[f64] {
        &self.profile
    }
}

pub const MAX_STACK_ORDER: usize = 3;

/// Compute the (r, s) derivative stack of h. Supported for r + s <= 3.
pub fn derivative_stack(
    m: &ConformalMetric,
    h: &ScalarField,
    r: usize,
    s: usize,
) -> Result<DerivativeStack> {
    if r + s > MAX_STACK_ORDER {
        return Err(CoreError::UnsupportedOrder { r, s, max: MAX_STACK_ORDER });
    }
    check_same_grid(m, h)?;

    let mut t = h.values().to_vec();
    let mut even = true;
    let mut w: i32 = 0;
    for _ in 0..r {
        t = covariant_step(m, &t, even, w, true);
        even = !even;
        w += 1;
    }
    for _ in 0..s {
        t = covariant_step(m, &t, even, w, false);
        even = !even;
        w -= 1;
    }
    Ok(DerivativeStack { grid: m.grid().clone(), r, s, profile: t })
}

/// One covariant derivative in the unitary frame. `barred` selects ∇̄ vs ∇.
fn covariant_step(m: &ConformalMetric, t: &[f64], even: bool, w: i32, barred: bool) -> Vec<f64> {
    let n = m.len();
    let grid = m.grid();
    let mut txi = vec![0.0; n];
    if even {
        grid.dxi_even(t, &mut txi);
    } else {
        grid.dxi_odd(t, &mut txi);
    }
    let sign = if barred { -1.0 } else { 1.0 };
    let wf = w as f64;
    let cot = grid.cot_xi();
    let uxi = m.u_xi();
    let eu = m.eu();
    (0..n)
        .map(|i| SQRT2_INV / eu[i] * (txi[i] + sign * wf * (uxi[i] + cot[i]) * t[i]))
        .collect()
}

/// L² norm squared ∫ |stack|² ω.
pub fn l2_norm_sq(m: &ConformalMetric, stack: &DerivativeStack) -> Result<f64> {
    if stack.grid() != m.grid() {
        return Err(CoreError::InvalidInput(
            "stack and metric live on different grids".into(),
        ));
    }
    let sq: Vec<f64> = stack.profile.iter().map(|t| t * t).collect();
    Ok(m.integrate(&sq))
}

fn check_same_grid(m: &ConformalMetric, f: &ScalarField) -> Result<()> {
    if f.grid() != m.grid() {
        return Err(CoreError::InvalidInput(
            "field and metric live on different grids".into(),
        ));
    }
    Ok(())
}

fn check_pole_regular(f: &ScalarField) -> Result<()> {
    let (d0, dpi) = f.pole_derivative_defect();
    let scale = 1.0 + f.sup_norm();
    let tol = pole_tolerance(f.grid().len()) * scale;
    if d0 > tol || dpi > tol {
        return Err(CoreError::InvalidInput(format!(
            "field violates pole regularity: defects ({d0:.3e}, {dpi:.3e}) > tol {tol:.3e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump_u(xi: f64) -> f64 {
        0.1 * xi.cos() * xi.sin() * xi.sin()
    }

    fn perturbed(n: usize) -> ConformalMetric {
        let g = LatitudeGrid::new(n).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|&x| bump_u(x)).collect();
        ConformalMetric::new(g, u).unwrap()
    }

    #[test]
    fn round_curvature_is_one() {
        let g = LatitudeGrid::new(64).unwrap();
        let m = ConformalMetric::round(g);
        let r = gauss_curvature(&m).unwrap();
        for &v in r.values() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_rescale_curvature() {
        let g = LatitudeGrid::new(64).unwrap();
        let c = 0.3;
        let m = ConformalMetric::with_raw_area(g, vec![c; 64]).unwrap();
        let r = gauss_curvature(&m).unwrap();
        let expect = (-2.0 * c).exp();
        for &v in r.values() {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    /// Richardson-extrapolated central differences on the analytic conformal
    /// factor, evaluated independently of the spectral machinery.
    fn fd_curvature_oracle(xi: f64, u: impl Fn(f64) -> f64) -> f64 {
        let d0 = |h: f64| -> f64 {
            let upp = (u(xi + h) - 2.0 * u(xi) + u(xi - h)) / (h * h);
            let up = (u(xi + h) - u(xi - h)) / (2.0 * h);
            upp + xi.cos() / xi.sin() * up
        };
        let h = PI / 512.0;
        let coarse = d0(h);
        let fine = d0(h / 2.0);
        let extrap = (4.0 * fine - coarse) / 3.0;
        (-2.0 * u(xi)).exp() * (1.0 - extrap)
    }

    #[test]
    fn curvature_matches_fd_oracle() {
        let n = 128;
        let g = LatitudeGrid::new(n).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|&x| bump_u(x)).collect();
        let m = ConformalMetric::with_raw_area(g, u).unwrap();
        let r = gauss_curvature(&m).unwrap();
        for (i, &xi) in m.grid().nodes().iter().enumerate() {
            let oracle = fd_curvature_oracle(xi, bump_u);
            assert!(
                (r.values()[i] - oracle).abs() < 1e-6,
                "node {i}: {} vs {oracle}",
                r.values()[i]
            );
        }
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        let m = perturbed(64);
        let f = ScalarField::from_fn(m.grid().clone(), |_| 3.7).unwrap();
        let lf = laplacian(&m, &f).unwrap();
        // roundoff in the coefficients is amplified by l² under differentiation
        assert!(lf.sup_norm() < 1e-10);
    }

    #[test]
    fn laplacian_first_harmonic() {
        // Δ cos ξ = -cos ξ on the round sphere (eigenvalue 2, halved)
        let g = LatitudeGrid::new(64).unwrap();
        let m = ConformalMetric::round(g);
        let f = ScalarField::from_fn(m.grid().clone(), |x| x.cos()).unwrap();
        let lf = laplacian(&m, &f).unwrap();
        for (i, &v) in lf.values().iter().enumerate() {
            assert!((v + f.values()[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn laplacian_divergence_theorem() {
        let m = perturbed(96);
        let f = ScalarField::from_fn(m.grid().clone(), |x| {
            (x.cos() * 1.3).exp() + 0.4 * (3.0 * x).cos()
        })
        .unwrap();
        let lf = laplacian(&m, &f).unwrap();
        assert!(m.integrate(lf.values()).abs() < 1e-10);
    }

    #[test]
    fn laplacian_rejects_pole_irregular_input() {
        let m = perturbed(64);
        // f ~ ξ near the pole: nonzero one-sided derivative
        let f = ScalarField::new(
            m.grid().clone(),
            m.grid().nodes().iter().map(|&x| 0.5 * x).collect(),
        )
        .unwrap();
        match laplacian(&m, &f) {
            Err(CoreError::InvalidInput(_)) => {}
            other => panic!("expected input error, got {other:?}"),
        }
    }

    #[test]
    fn laplacian_self_adjoint() {
        let m = perturbed(96);
        let f = ScalarField::from_fn(m.grid().clone(), |x| (1.1 * x.cos()).exp()).unwrap();
        let g = ScalarField::from_fn(m.grid().clone(), |x| (2.0 * x).cos() - 0.2 * x.cos()).unwrap();
        let lf = laplacian(&m, &f).unwrap();
        let lg = laplacian(&m, &g).unwrap();
        let a = m.integrate(
            &lf.values().iter().zip(g.values()).map(|(x, y)| x * y).collect::<Vec<_>>(),
        );
        let b = m.integrate(
            &f.values().iter().zip(lg.values()).map(|(x, y)| x * y).collect::<Vec<_>>(),
        );
        let nf = m.integrate(&f.values().iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
        let ng = m.integrate(&g.values().iter().map(|x| x * x).collect::<Vec<_>>()).sqrt();
        assert!((a - b).abs() / (nf * ng) < 1e-10);
    }

    #[test]
    fn poisson_zero_rhs() {
        let m = perturbed(64);
        let rhs = ScalarField::zeros(m.grid().clone());
        let h = poisson_solve(&m, &rhs).unwrap();
        assert!(h.sup_norm() < 1e-13);
    }

    #[test]
    fn poisson_roundtrip() {
        let m = perturbed(256);
        let f = ScalarField::from_fn(m.grid().clone(), |x| {
            (0.9 * x.cos()).sin() + 0.5 * (2.0 * x).cos()
        })
        .unwrap();
        let lf = laplacian(&m, &f).unwrap();
        let h = poisson_solve(&m, &lf).unwrap();
        let fmean = m.mean(f.values());
        for i in 0..m.len() {
            assert!((h.values()[i] - (f.values()[i] - fmean)).abs() < 1e-8);
        }
    }

    #[test]
    fn poisson_first_harmonic() {
        let g = LatitudeGrid::new(64).unwrap();
        let m = ConformalMetric::round(g);
        let rhs = ScalarField::from_fn(m.grid().clone(), |x| -x.cos()).unwrap();
        let h = poisson_solve(&m, &rhs).unwrap();
        for (i, &v) in h.values().iter().enumerate() {
            assert!((v - m.grid().nodes()[i].cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn poisson_rejects_nonzero_mean() {
        let m = perturbed(64);
        let rhs = ScalarField::from_fn(m.grid().clone(), |_| 0.1).unwrap();
        match poisson_solve(&m, &rhs) {
            Err(CoreError::Unsolvable { .. }) => {}
            other => panic!("expected solvability error, got {other:?}"),
        }
    }

    #[test]
    fn ricci_potential_round() {
        let g = LatitudeGrid::new(64).unwrap();
        let m = ConformalMetric::round(g);
        let (h, mu) = ricci_potential(&m).unwrap();
        assert!((mu - 1.0).abs() < 1e-13);
        assert!(h.sup_norm() < 1e-12);
    }

    #[test]
    fn ricci_potential_gauss_bonnet() {
        // total curvature is topological: μ = 1 for any valid metric
        for &n in &[64, 128] {
            let m = perturbed(n);
            let (_, mu) = ricci_potential(&m).unwrap();
            assert!((mu - 1.0).abs() < 1e-12, "n={n}: mu={mu}");
        }
    }

    #[test]
    fn ricci_potential_mean_curvature_identity() {
        let m = perturbed(96);
        let r = gauss_curvature(&m).unwrap();
        let (_, mu) = ricci_potential(&m).unwrap();
        let dev: Vec<f64> = r.values().iter().map(|v| v - mu).collect();
        assert!(m.integrate(&dev).abs() < 1e-10);
    }

    #[test]
    fn stack_of_zero_potential() {
        let m = perturbed(64);
        let h = ScalarField::zeros(m.grid().clone());
        for (r, s) in [(1, 0), (1, 1), (2, 0), (2, 1)] {
            let st = derivative_stack(&m, &h, r, s).unwrap();
            assert!(st.profile().iter().all(|&t| t == 0.0));
        }
    }

    #[test]
    fn stack_order_cap() {
        let m = perturbed(32);
        let h = ScalarField::zeros(m.grid().clone());
        match derivative_stack(&m, &h, 2, 2) {
            Err(CoreError::UnsupportedOrder { .. }) => {}
            other => panic!("expected order error, got {other:?}"),
        }
    }

    #[test]
    fn stack_11_trace_matches_laplacian() {
        let m = perturbed(256);
        let (h, _) = ricci_potential(&m).unwrap();
        let st = derivative_stack(&m, &h, 1, 1).unwrap();
        let lh = laplacian(&m, &h).unwrap();
        for i in 0..m.len() {
            assert!((st.profile()[i] - lh.values()[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn stack_reality_low_orders() {
        let m = perturbed(96);
        let (h, _) = ricci_potential(&m).unwrap();
        for (r, s) in [(1, 0), (2, 0), (1, 1)] {
            let a = derivative_stack(&m, &h, r, s).unwrap();
            let b = derivative_stack(&m, &h, s, r).unwrap();
            for i in 0..m.len() {
                assert!((a.profile()[i] - b.profile()[i]).abs() < 1e-11, "({r},{s}) node {i}");
            }
        }
    }

    #[test]
    fn stack_order3_commutator_on_round() {
        // ∇∇̄∇̄h and ∇∇∇̄h differ by the curvature term R·∇̄h; on the round
        // sphere the defect is exactly h_ξ/√2.
        let g = LatitudeGrid::new(128).unwrap();
        let m = ConformalMetric::round(g);
        let h = ScalarField::from_fn(m.grid().clone(), |x| (2.0 * x).cos() + 0.3 * (3.0 * x).cos())
            .unwrap();
        let a = derivative_stack(&m, &h, 2, 1).unwrap();
        let b = derivative_stack(&m, &h, 1, 2).unwrap();
        let grad = derivative_stack(&m, &h, 1, 0).unwrap();
        for i in 0..m.len() {
            let defect = a.profile()[i] - b.profile()[i];
            assert!((defect - grad.profile()[i]).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn grad_norm_matches_refined_grid() {
        let coarse = perturbed(256);
        let fine = perturbed(512);
        let (hc, _) = ricci_potential(&coarse).unwrap();
        let (hf, _) = ricci_potential(&fine).unwrap();
        let yc = l2_norm_sq(&coarse, &derivative_stack(&coarse, &hc, 1, 0).unwrap()).unwrap();
        let yf = l2_norm_sq(&fine, &derivative_stack(&fine, &hf, 1, 0).unwrap()).unwrap();
        assert!((yc - yf).abs() / yf.abs() < 1e-6, "{yc} vs {yf}");
    }

    #[test]
    fn l2_norm_scaling_and_positivity() {
        let m = perturbed(64);
        let (h, _) = ricci_potential(&m).unwrap();
        let st1 = derivative_stack(&m, &h, 1, 0).unwrap();
        let h2 = ScalarField::new(
            m.grid().clone(),
            h.values().iter().map(|v| 2.0 * v).collect(),
        )
        .unwrap();
        let st2 = derivative_stack(&m, &h2, 1, 0).unwrap();
        let n1 = l2_norm_sq(&m, &st1).unwrap();
        let n2 = l2_norm_sq(&m, &st2).unwrap();
        assert!(n1 > 0.0);
        assert!((n2 - 4.0 * n1).abs() < 1e-12 * n2.abs().max(1.0));
    }

    #[test]
    fn grad_norm_integration_by_parts() {
        // ∫|∇h|²ω = -∫ h Δh ω; for u = 0, h = cos ξ both equal 4π/3
        let g = LatitudeGrid::new(64).unwrap();
        let m = ConformalMetric::round(g);
        let h = ScalarField::from_fn(m.grid().clone(), |x| x.cos()).unwrap();
        let y = l2_norm_sq(&m, &derivative_stack(&m, &h, 1, 0).unwrap()).unwrap();
        assert!((y - 4.0 * PI / 3.0).abs() < 1e-11);
        let lh = laplacian(&m, &h).unwrap();
        let hlh: Vec<f64> = h.values().iter().zip(lh.values()).map(|(a, b)| a * b).collect();
        assert!((y + m.integrate(&hlh)).abs() < 1e-11);
    }
}
