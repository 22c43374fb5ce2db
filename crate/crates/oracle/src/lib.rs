//! Independent reference computations for the flow-lab test suites.
//!
//! Everything here deliberately avoids the production discretization: the
//! round-sphere del-bar spectra come from a Rayleigh-Ritz solve in a weighted
//! Jacobi polynomial basis in x = cos ξ, with Gauss-Legendre quadrature that
//! is exact on every integrand (they are all polynomial after the weight
//! factors are pulled out).
//!
//! In sector k >= 1 the quadratic form pair is, with ψ = w_k(x) P(x) and
//! w_k = (1-x)^{(k+1)/2} (1+x)^{(k-1)/2}:
//!
//!   ‖∂̄V‖² = π ∫ (1-x)^{k+2} (1+x)^{k-2} [(1+x)P' + (k-1)P]² dx
//!   ‖V‖²  = 2π ∫ (1-x)^{k+1} (1+x)^{k-1} P² dx
//!
//! and for k = 0, with ψ = √(1-x²) χ:
//!
//!   ‖∂̄V‖² = π ∫ (1-x²)² χ'² dx,   ‖V‖² = 2π ∫ (1-x²) χ² dx.
//!
//! Ground states close in closed form: λ_min(k) = (|k|-1)(|k|+2)/2 for
//! |k| >= 1 and the sector-0 ladder is j(j+3)/2, so the global minimum over
//! the round sphere is 2.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Legendre values P_0..P_deg and derivatives at x.
fn legendre_table(deg: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; deg + 1];
    let mut dp = vec![0.0; deg + 1];
    p[0] = 1.0;
    if deg >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for j in 2..=deg {
        let jf = j as f64;
        p[j] = ((2.0 * jf - 1.0) * x * p[j - 1] - (jf - 1.0) * p[j - 2]) / jf;
        dp[j] = dp[j - 2] + (2.0 * jf - 1.0) * p[j - 1];
    }
    (p, dp)
}

/// Eigenvalues of the del-bar Laplacian on sector-k vector fields of the
/// round sphere (area 4π), ascending, including any kernel zeros.
pub fn round_sector_spectrum(k: i32, basis_degree: usize) -> Vec<f64> {
    let k = k.unsigned_abs() as usize;
    let deg = basis_degree;
    let quad_n = 2 * (deg + k + 4);
    let (xs, ws) = gauss_legendre(quad_n);

    let dim = deg + 1;
    let mut e = DMatrix::zeros(dim, dim);
    let mut m = DMatrix::zeros(dim, dim);

    for (x, w) in xs.iter().zip(&ws) {
        let (p, dp) = legendre_table(deg, *x);
        let (ewt, mwt, bvals): (f64, f64, Vec<f64>) = if k == 0 {
            let om = 1.0 - x * x;
            (PI * om * om, 2.0 * PI * om, dp.clone())
        } else {
            let kf = k as f64;
            let ewt = PI * (1.0 - x).powi(k as i32 + 2) * (1.0 + x).powi(k as i32 - 2);
            let mwt = 2.0 * PI * (1.0 - x).powi(k as i32 + 1) * (1.0 + x).powi(k as i32 - 1);
            let b: Vec<f64> = (0..dim).map(|j| (1.0 + x) * dp[j] + (kf - 1.0) * p[j]).collect();
            (ewt, mwt, b)
        };
        for i in 0..dim {
            for j in 0..dim {
                e[(i, j)] += w * ewt * bvals[i] * bvals[j];
                m[(i, j)] += w * mwt * p[i] * p[j];
            }
        }
    }

    generalized_symmetric_eigenvalues(&e, &m)
}

/// Ascending eigenvalues of the pencil (A, M), M positive definite.
pub fn generalized_symmetric_eigenvalues(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
    let chol = nalgebra::Cholesky::new(m.clone()).expect("mass matrix must be SPD");
    let l = chol.l();
    let x = l.solve_lower_triangular(a).expect("triangular solve");
    let c = l.solve_lower_triangular(&x.transpose()).expect("triangular solve");
    let sym = 0.5 * (&c + c.transpose());
    let mut eigs: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eigs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    eigs
}

/// Lowest strictly positive eigenvalue of a sector spectrum.
pub fn first_positive(eigs: &[f64]) -> f64 {
    let lmax = eigs.last().copied().unwrap_or(1.0).max(1.0);
    eigs.iter().copied().find(|&v| v > 1e-8 * lmax).expect("no positive eigenvalue")
}

/// Global lowest positive del-bar eigenvalue of the round sphere over
/// sectors |k| <= cap.
pub fn round_lambda_min(cap: i32, basis_degree: usize) -> f64 {
    (0..=cap)
        .map(|k| first_positive(&round_sector_spectrum(k, basis_degree)))
        .fold(f64::INFINITY, f64::min)
}
