//! Pointwise curvature-operator algebra in complex dimension two.
//!
//! A Kähler curvature tensor R_{āb c̄d} in a unitary frame is symmetric under
//! swapping the barred pair and the unbarred pair separately, and Hermitian
//! under conjugating both. Equivalently it is a Hermitian form on the
//! symmetric pairs {(1,1), (1,2), (2,2)} — nine real parameters.
//!
//! Viewed on real (1,1)-forms (Hermitian 2x2 matrices) it becomes a real
//! symmetric 4x4 matrix in the orthonormal basis {I/√2, σ₁/√2, σ₂/√2, σ₃/√2}:
//! scalar block R/2 in the Kähler-form direction, the traceless Ricci as the
//! off-diagonal block, and the traceless operator Op(S) as the 3x3 block.
//! The Op(S) eigenvalues m₁ ≤ m₂ ≤ m₃ satisfy m₁+m₂+m₃ = R/2, and
//! 2-nonnegativity (m₁+m₂ ≥ 0) plus Ricci nonnegativity pin every eigenvalue
//! in terms of a scalar-curvature bound.

use crate::error::{CoreError, Result};
use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, SymmetricEigen, Vector3};
use num_complex::Complex64;

type C = Complex64;

/// Validated Kähler curvature tensor at a point, complex dimension 2.
#[derive(Debug, Clone)]
pub struct CurvatureTensor2 {
    /// r[a][b][c][d] = R_{āb c̄d}.
    r: [[[[C; 2]; 2]; 2]; 2],
}

impl CurvatureTensor2 {
    /// Validate and adopt raw components; the symmetry residual must stay
    /// below 1e-12 relative to the largest component.
    pub fn from_components(raw: [[[[C; 2]; 2]; 2]; 2]) -> Result<Self> {
        let scale = 1.0
            + raw
                .iter()
                .flatten()
                .flatten()
                .flatten()
                .fold(0.0_f64, |m, z| m.max(z.norm()));
        let tol = 1e-12 * scale;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let v = raw[a][b][c][d];
                        let barred = raw[c][b][a][d];
                        if (v - barred).norm() > tol {
                            return Err(CoreError::SymmetryViolation {
                                identity: format!("R_({a}{b})({c}{d}) = R_({c}{b})({a}{d})"),
                                residual: (v - barred).norm(),
                            });
                        }
                        let unbarred = raw[a][d][c][b];
                        if (v - unbarred).norm() > tol {
                            return Err(CoreError::SymmetryViolation {
                                identity: format!("R_({a}{b})({c}{d}) = R_({a}{d})({c}{b})"),
                                residual: (v - unbarred).norm(),
                            });
                        }
                        let herm = raw[b][a][d][c].conj();
                        if (v - herm).norm() > tol {
                            return Err(CoreError::SymmetryViolation {
                                identity: format!("R_({a}{b})({c}{d}) = conj R_({b}{a})({d}{c})"),
                                residual: (v - herm).norm(),
                            });
                        }
                    }
                }
            }
        }
        Ok(CurvatureTensor2 { r: raw })
    }

    /// Build from the Hermitian pair-form M[(ac)][(bd)] over the symmetric
    /// pair index {(0,0), (0,1), (1,1)}; the Kähler symmetries hold by
    /// construction.
    pub fn from_pair_form(m: &[[C; 3]; 3]) -> Result<Self> {
        let pair = |x: usize, y: usize| x + y;
        let mut raw = [[[[C::new(0.0, 0.0); 2]; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        raw[a][b][c][d] = m[pair(a, c)][pair(b, d)];
                    }
                }
            }
        }
        CurvatureTensor2::from_components(raw)
    }

    pub fn component(&self, a: usize, b: usize, c: usize, d: usize) -> C {
        self.r[a][b][c][d]
    }

    /// Ricci form R_{āb} = Σ_c R_{āb c̄c} as a Hermitian 2x2 matrix.
    pub fn ricci(&self) -> [[C; 2]; 2] {
        let mut ric = [[C::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    ric[a][b] += self.r[a][b][c][c];
                }
            }
        }
        ric
    }

    /// Scalar curvature R = Σ_a R_{āa}; real by Hermitian symmetry.
    pub fn scalar(&self) -> f64 {
        let ric = self.ricci();
        (ric[0][0] + ric[1][1]).re
    }

    /// Eigenvalues of the Ricci form, ascending.
    pub fn ricci_eigenvalues(&self) -> [f64; 2] {
        let ric = self.ricci();
        let p = ric[0][0].re;
        let r = ric[1][1].re;
        let q = ric[0][1].norm();
        let mid = 0.5 * (p + r);
        let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        [mid - rad, mid + rad]
    }

    /// Conjugate the frame by a unitary matrix: spectra are invariant.
    pub fn rotate_frame(&self, u: &[[C; 2]; 2]) -> Result<CurvatureTensor2> {
        let mut raw = [[[[C::new(0.0, 0.0); 2]; 2]; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let mut acc = C::new(0.0, 0.0);
                        for e in 0..2 {
                            for f in 0..2 {
                                for g in 0..2 {
                                    for h in 0..2 {
                                        acc += u[e][a].conj()
                                            * u[f][b]
                                            * u[g][c].conj()
                                            * u[h][d]
                                            * self.r[e][f][g][h];
                                    }
                                }
                            }
                        }
                        raw[a][b][c][d] = acc;
                    }
                }
            }
        }
        CurvatureTensor2::from_components(raw)
    }
}

/// Orthonormal Hermitian basis {I, σ₁, σ₂, σ₃}/√2 of real (1,1)-forms.
fn form_basis() -> [[[C; 2]; 2]; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C::new(0.0, 0.0);
    let re = |v: f64| C::new(v, 0.0);
    let im = |v: f64| C::new(0.0, v);
    [
        [[re(s), z], [z, re(s)]],
        [[z, re(s)], [re(s), z]],
        [[z, im(-s)], [im(s), z]],
        [[re(s), z], [z, re(-s)]],
    ]
}

/// The curvature operator on real (1,1)-forms in block form.
#[derive(Debug, Clone)]
pub struct CurvatureOperatorMatrix {
    mat: Matrix4<f64>,
}

impl CurvatureOperatorMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.mat
    }

    /// Top-left entry: R/2.
    pub fn scalar_block(&self) -> f64 {
        self.mat[(0, 0)]
    }

    /// Off-diagonal block: the traceless Ricci in the traceless-form basis.
    pub fn s_vector(&self) -> Vector3<f64> {
        Vector3::new(self.mat[(0, 1)], self.mat[(0, 2)], self.mat[(0, 3)])
    }

    /// Traceless block Op(S).
    pub fn op_s(&self) -> Matrix3<f64> {
        self.mat.fixed_view::<3, 3>(1, 1).into_owned()
    }

    /// Ascending eigenvalues of Op(S).
    pub fn op_s_eigenvalues(&self) -> [f64; 3] {
        let eig = SymmetricEigen::new(self.op_s());
        let mut v = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Ascending eigenvalues of the full 4x4 operator.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.mat);
        let mut v = [
            eig.eigenvalues[0],
            eig.eigenvalues[1],
            eig.eigenvalues[2],
            eig.eigenvalues[3],
        ];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// Assemble the 4x4 operator from the tensor.
pub fn operator_matrix(t: &CurvatureTensor2) -> CurvatureOperatorMatrix {
    let basis = form_basis();
    let mut mat = Matrix4::zeros();
    for mu in 0..4 {
        for nu in mu..4 {
            let mut acc = C::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            acc += t.component(a, b, c, d) * basis[mu][b][a] * basis[nu][d][c];
                        }
                    }
                }
            }
            debug_assert!(acc.im.abs() < 1e-10 * (1.0 + acc.re.abs()));
            mat[(mu, nu)] = acc.re;
            mat[(nu, mu)] = acc.re;
        }
    }
    CurvatureOperatorMatrix { mat }
}

/// The two halves of the positivity condition: (Ricci nonnegative,
/// traceless operator 2-nonnegative).
pub fn condition_c(t: &CurvatureTensor2) -> (bool, bool) {
    let tol = -1e-12 * (1.0 + t.scalar().abs());
    let ric = t.ricci_eigenvalues();
    let ricci_nonneg = ric[0] >= tol;
    let m = operator_matrix(t).op_s_eigenvalues();
    let two_nonneg = m[0] + m[1] >= tol;
    (ricci_nonneg, two_nonneg)
}

/// Result of the eigenvalue bound chain under condition (C) and R <= bound.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub scalar: f64,
    pub op_s_eigenvalues: [f64; 3],
    pub trace_identity_gap: f64,
    pub m3_le_half_scalar: bool,
    pub m1_abs_le_m2_plus_m3: bool,
    pub m2_plus_m3_le_bound: bool,
    pub entries_le_spectral_radius: bool,
    /// |S|² against tr(S²) from the Ricci data.
    pub s_norm_sq: f64,
    pub s_trace_sq: f64,
    pub s_norm_ok: bool,
    pub full_eigenvalues: [f64; 4],
    /// max(R/2, m₃) + |S|: a computable bound on the full spectrum.
    pub full_eig_bound: f64,
    pub full_ok: bool,
}

impl BoundsReport {
    pub fn all_ok(&self) -> bool {
        self.m3_le_half_scalar
            && self.m1_abs_le_m2_plus_m3
            && self.m2_plus_m3_le_bound
            && self.entries_le_spectral_radius
            && self.s_norm_ok
            && self.full_ok
            && self.trace_identity_gap < 1e-12 * (1.0 + self.scalar.abs())
    }
}

/// Verify the bound chain m₃ ≤ R/2 ≤ bound/2, |m₁| ≤ m₂+m₃ ≤ bound, entry
/// bounds for Op(S), and a computable bound on the full operator spectrum.
pub fn eigenvalue_bounds(t: &CurvatureTensor2, bound: f64) -> Result<BoundsReport> {
    let (ric_ok, two_ok) = condition_c(t);
    if !ric_ok || !two_ok {
        return Err(CoreError::BoundPrecondition(
            "tensor does not satisfy condition (C)".into(),
        ));
    }
    let scalar = t.scalar();
    if scalar < -1e-12 || scalar > bound * (1.0 + 1e-12) {
        return Err(CoreError::BoundPrecondition(format!(
            "scalar curvature {scalar} outside [0, {bound}]"
        )));
    }
    let op = operator_matrix(t);
    let m = op.op_s_eigenvalues();
    let tol = 1e-10 * (1.0 + bound);
    let trace_identity_gap = (m[0] + m[1] + m[2] - 0.5 * scalar).abs();

    let ops = op.op_s();
    let radius = m.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    let entries_le_spectral_radius = ops.iter().all(|&e| e.abs() <= radius + tol);

    let svec = op.s_vector();
    let s_norm_sq = svec.norm_squared();
    // tr(S²) of the traceless Hermitian Ricci, from the Ricci data directly
    let ric = t.ricci_eigenvalues();
    let dev0 = ric[0] - 0.5 * scalar;
    let dev1 = ric[1] - 0.5 * scalar;
    let s_trace_sq = dev0 * dev0 + dev1 * dev1;

    let full = op.eigenvalues();
    let full_eig_bound = (0.5 * scalar).max(m[2]).max(-m[0]) + svec.norm();
    let full_ok = full.iter().all(|&v| v.abs() <= full_eig_bound + tol);

    Ok(BoundsReport {
        scalar,
        op_s_eigenvalues: m,
        trace_identity_gap,
        m3_le_half_scalar: m[2] <= 0.5 * scalar + tol,
        m1_abs_le_m2_plus_m3: m[0].abs() <= m[1] + m[2] + tol,
        m2_plus_m3_le_bound: m[1] + m[2] <= bound + tol,
        entries_le_spectral_radius,
        s_norm_sq,
        s_trace_sq,
        s_norm_ok: s_norm_sq <= s_trace_sq + tol,
        full_eigenvalues: full,
        full_eig_bound,
        full_ok,
    })
}

/// Draw a random condition-(C) tensor with scalar curvature in (0, bound]:
/// Op(S) eigenvalues sampled from the 2-nonnegative cone and rotated by a
/// random orthogonal frame, the traceless Ricci sampled inside the
/// nonnegativity ball, then the tensor reconstructed from the blocks.
/// Rejection keeps only samples whose reconstructed spectra verify.
pub fn sample_condition_c(rng: &mut impl rand::Rng, bound: f64) -> Result<CurvatureTensor2> {
    for _ in 0..64 {
        let scalar = bound * (0.2 + 0.8 * rng.gen::<f64>());
        let s = 0.5 * scalar;

        // eigenvalues m1 <= m2 <= m3, m1+m2 >= 0, sum = s
        let m1 = if rng.gen::<bool>() {
            -0.25 * s * rng.gen::<f64>()
        } else {
            s / 3.0 * rng.gen::<f64>()
        };
        let lo = (-m1).max(m1);
        let hi = 0.5 * (s - m1);
        if hi <= lo {
            continue;
        }
        let m2 = lo + (hi - lo) * rng.gen::<f64>();
        let m3 = s - m1 - m2;
        if m3 < m2 {
            continue;
        }

        let q = random_rotation(rng);
        let op_s = q * Matrix3::from_diagonal(&Vector3::new(m1, m2, m3)) * q.transpose();

        // traceless Ricci inside the nonnegativity ball |s_vec| <= R/2
        let dir = Vector3::new(
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
            rng.gen::<f64>() - 0.5,
        );
        let dir = if dir.norm() < 1e-9 { Vector3::x() } else { dir.normalize() };
        let s_vec = dir * (0.9 * s * rng.gen::<f64>());

        let t = tensor_from_blocks(s, s_vec, op_s)?;
        let (ric_ok, two_ok) = condition_c(&t);
        if ric_ok && two_ok && t.scalar() <= bound * (1.0 + 1e-9) {
            return Ok(t);
        }
    }
    Err(CoreError::Numerical("condition-C sampler failed to produce a tensor".into()))
}

fn random_rotation(rng: &mut impl rand::Rng) -> Matrix3<f64> {
    // QR of a random matrix, sign-fixed
    let a = Matrix3::from_fn(|_, _| rng.gen::<f64>() - 0.5);
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for i in 0..3 {
        if r[(i, i)] < 0.0 {
            for j in 0..3 {
                q[(j, i)] = -q[(j, i)];
            }
        }
    }
    q
}

/// Random special-unitary 2x2 frame change.
pub fn random_unitary(rng: &mut impl rand::Rng) -> [[C; 2]; 2] {
    use std::f64::consts::TAU;
    let phi = TAU * rng.gen::<f64>();
    let psi = TAU * rng.gen::<f64>();
    let theta = std::f64::consts::FRAC_PI_2 * rng.gen::<f64>();
    let (ct, st) = (theta.cos(), theta.sin());
    let a = C::from_polar(ct, phi);
    let b = C::from_polar(st, psi);
    [[a, -b.conj()], [b, a.conj()]]
}

/// Reconstruct a curvature tensor with prescribed blocks (R/2, S-vector,
/// Op(S)); the targets must satisfy tr Op(S) = R/2.
pub fn tensor_from_blocks(
    half_scalar: f64,
    s_vector: Vector3<f64>,
    op_s: Matrix3<f64>,
) -> Result<CurvatureTensor2> {
    // 9 real parameters of the Hermitian pair form
    let param_tensor = |x: &DVector<f64>| -> Result<CurvatureTensor2> {
        let m = [
            [C::new(x[0], 0.0), C::new(x[3], x[4]), C::new(x[5], x[6])],
            [C::new(x[3], -x[4]), C::new(x[1], 0.0), C::new(x[7], x[8])],
            [C::new(x[5], -x[6]), C::new(x[7], -x[8]), C::new(x[2], 0.0)],
        ];
        CurvatureTensor2::from_pair_form(&m)
    };

    // forward map params -> (R/2, s, upper Op(S)) assembled column by column
    let observe = |t: &CurvatureTensor2| -> DVector<f64> {
        let op = operator_matrix(t);
        let s = op.s_vector();
        let o = op.op_s();
        DVector::from_vec(vec![
            op.scalar_block(),
            s[0],
            s[1],
            s[2],
            o[(0, 0)],
            o[(0, 1)],
            o[(0, 2)],
            o[(1, 1)],
            o[(1, 2)],
            o[(2, 2)],
        ])
    };

    let mut fwd = DMatrix::zeros(10, 9);
    for j in 0..9 {
        let mut x = DVector::zeros(9);
        x[j] = 1.0;
        let t = param_tensor(&x)?;
        fwd.set_column(j, &observe(&t));
    }
    let target = DVector::from_vec(vec![
        half_scalar,
        s_vector[0],
        s_vector[1],
        s_vector[2],
        op_s[(0, 0)],
        op_s[(0, 1)],
        op_s[(0, 2)],
        op_s[(1, 1)],
        op_s[(1, 2)],
        op_s[(2, 2)],
    ]);
    let svd = fwd.clone().svd(true, true);
    let x = svd
        .solve(&target, 1e-12)
        .map_err(|e| CoreError::Numerical(format!("block reconstruction failed: {e}")))?;
    let residual = (&fwd * &x - &target).norm();
    if residual > 1e-8 * (1.0 + target.norm()) {
        return Err(CoreError::Numerical(format!(
            "blocks inconsistent with a Kähler tensor (residual {residual:.3e})"
        )));
    }
    param_tensor(&x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> [[[[C; 2]; 2]; 2]; 2] {
        [[[[C::new(0.0, 0.0); 2]; 2]; 2]; 2]
    }

    /// Fubini-Study-type pattern: R_{1̄11̄1}=R_{2̄22̄2}=2, the mixed entries 1.
    fn symmetric_space() -> CurvatureTensor2 {
        let mut r = zero();
        let one = C::new(1.0, 0.0);
        r[0][0][0][0] = 2.0 * one;
        r[1][1][1][1] = 2.0 * one;
        r[0][0][1][1] = one;
        r[1][1][0][0] = one;
        r[0][1][1][0] = one;
        r[1][0][0][1] = one;
        CurvatureTensor2::from_components(r).unwrap()
    }

    #[test]
    fn zero_tensor_accepted() {
        let t = CurvatureTensor2::from_components(zero()).unwrap();
        assert_eq!(t.scalar(), 0.0);
        let op = operator_matrix(&t);
        assert!(op.matrix().iter().all(|&v| v == 0.0));
        assert_eq!(condition_c(&t), (true, true));
    }

    #[test]
    fn symmetric_space_traces() {
        let t = symmetric_space();
        let ric = t.ricci();
        assert!((ric[0][0].re - 3.0).abs() < 1e-14);
        assert!((ric[1][1].re - 3.0).abs() < 1e-14);
        assert!(ric[0][1].norm() < 1e-14);
        assert!((t.scalar() - 6.0).abs() < 1e-14);
    }

    #[test]
    fn broken_symmetry_rejected() {
        let mut r = zero();
        r[0][0][0][0] = C::new(1.0, 0.0);
        r[0][1][1][0] = C::new(0.5, 0.0);
        // the barred-swap partner left inconsistent by 1e-3
        r[1][1][0][0] = C::new(0.5 + 1e-3, 0.0);
        r[0][0][1][1] = C::new(0.5 + 1e-3, 0.0);
        match CurvatureTensor2::from_components(r) {
            Err(CoreError::SymmetryViolation { .. }) => {}
            other => panic!("expected symmetry violation, got {other:?}"),
        }
    }

    #[test]
    fn symmetric_space_operator_blocks() {
        let t = symmetric_space();
        let op = operator_matrix(&t);
        assert!((op.scalar_block() - 3.0).abs() < 1e-14);
        assert!(op.s_vector().norm() < 1e-14);
        let m = op.op_s_eigenvalues();
        for v in m {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // trace identity
        assert!((m.iter().sum::<f64>() - 0.5 * t.scalar()).abs() < 1e-12);
    }

    /// Independent quadratic-form oracle: diagonalize the curvature form on
    /// an explicitly constructed basis of real (1,1)-forms.
    #[test]
    fn operator_matches_quadratic_form_oracle() {
        let t = symmetric_space();
        // real (1,1)-forms as Hermitian matrices built from scratch
        let hermitian_basis: [[[C; 2]; 2]; 4] = [
            [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(0.0, 0.0)]],
            [[C::new(0.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]],
            [[C::new(0.0, 0.0), C::new(1.0, 0.0)], [C::new(1.0, 0.0), C::new(0.0, 0.0)]],
            [[C::new(0.0, 0.0), C::new(0.0, -1.0)], [C::new(0.0, 1.0), C::new(0.0, 0.0)]],
        ];
        // Gram matrix and quadratic form in this (non-orthonormal) basis
        let mut gram = Matrix4::zeros();
        let mut quad = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut g = C::new(0.0, 0.0);
                let mut q = C::new(0.0, 0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        g += hermitian_basis[i][a][b] * hermitian_basis[j][a][b].conj();
                        for c in 0..2 {
                            for d in 0..2 {
                                q += t.component(a, b, c, d)
                                    * hermitian_basis[i][b][a]
                                    * hermitian_basis[j][d][c];
                            }
                        }
                    }
                }
                gram[(i, j)] = g.re;
                quad[(i, j)] = q.re;
            }
        }
        let chol = nalgebra::Cholesky::new(gram).unwrap();
        let l = chol.l();
        let x = l.solve_lower_triangular(&quad).unwrap();
        let c = l.solve_lower_triangular(&x.transpose()).unwrap();
        let mut oracle: Vec<f64> = SymmetricEigen::new(0.5 * (&c + c.transpose()))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut ours: Vec<f64> = operator_matrix(&t).eigenvalues().to_vec();
        ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ours.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn einstein_product_block() {
        // Ricci = 2·id, R = 4, Op(S) eigenvalues {1, 1, 0}
        let mut r = zero();
        let one = C::new(1.0, 0.0);
        r[0][0][0][0] = one;
        r[1][1][1][1] = one;
        r[0][0][1][1] = one;
        r[1][1][0][0] = one;
        r[0][1][1][0] = one;
        r[1][0][0][1] = one;
        let t = CurvatureTensor2::from_components(r).unwrap();
        assert!((t.scalar() - 4.0).abs() < 1e-14);
        let op = operator_matrix(&t);
        assert!(op.s_vector().norm() < 1e-14);
        let mut full = op.eigenvalues().to_vec();
        full.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expect = [2.0, 1.0, 1.0, 0.0];
        for (v, e) in full.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        let rep = eigenvalue_bounds(&t, 4.0).unwrap();
        assert!(rep.all_ok());
    }

    #[test]
    fn two_nonnegativity_classification() {
        // eigenvalues (-1, 2, 2): 2-nonnegative; (-2, 1, 4): not
        let cases = [([-1.0, 2.0, 2.0], true), ([-2.0, 1.0, 4.0], false)];
        for (m, expect) in cases {
            let half_scalar: f64 = m.iter().sum();
            let op_s = Matrix3::from_diagonal(&Vector3::new(m[0], m[1], m[2]));
            let t = tensor_from_blocks(half_scalar, Vector3::zeros(), op_s).unwrap();
            let got = operator_matrix(&t).op_s_eigenvalues();
            let mut sorted = m;
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (g, e) in got.iter().zip(sorted) {
                assert!((g - e).abs() < 1e-9, "{g} vs {e}");
            }
            let (_, two) = condition_c(&t);
            assert_eq!(two, expect);
        }
    }

    #[test]
    fn bounds_reject_violator() {
        let op_s = Matrix3::from_diagonal(&Vector3::new(-2.0, 1.0, 4.0));
        let t = tensor_from_blocks(3.0, Vector3::zeros(), op_s).unwrap();
        match eigenvalue_bounds(&t, 10.0) {
            Err(CoreError::BoundPrecondition(_)) => {}
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn random_condition_c_suite() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(0xC0FFEE);
        for i in 0..200 {
            let t = sample_condition_c(&mut rng, 10.0).unwrap();
            let rep = eigenvalue_bounds(&t, 10.0).unwrap();
            assert!(rep.all_ok(), "sample {i} violated bounds: {rep:?}");
        }
    }

    #[test]
    fn s_vector_is_traceless_ricci() {
        // the off-diagonal block is exactly the σ-expansion of the traceless
        // Ricci: |S|² = tr(S²)/2 with equality
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        for _ in 0..16 {
            let t = sample_condition_c(&mut rng, 6.0).unwrap();
            let rep = eigenvalue_bounds(&t, 6.0).unwrap();
            assert!(
                (rep.s_norm_sq - 0.5 * rep.s_trace_sq).abs() < 1e-10 * (1.0 + rep.s_trace_sq),
                "|S|² = {} vs tr(S²)/2 = {}",
                rep.s_norm_sq,
                0.5 * rep.s_trace_sq
            );
        }
    }

    #[test]
    fn unitary_covariance_of_spectra() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for _ in 0..24 {
            let t = sample_condition_c(&mut rng, 8.0).unwrap();
            let u = random_unitary(&mut rng);
            let t2 = t.rotate_frame(&u).unwrap();

            let r1 = t.ricci_eigenvalues();
            let r2 = t2.ricci_eigenvalues();
            for (a, b) in r1.iter().zip(&r2) {
                assert!((a - b).abs() < 1e-10, "Ricci spectrum moved: {a} vs {b}");
            }
            let m1 = operator_matrix(&t).op_s_eigenvalues();
            let m2 = operator_matrix(&t2).op_s_eigenvalues();
            for (a, b) in m1.iter().zip(&m2) {
                assert!((a - b).abs() < 1e-10, "Op(S) spectrum moved: {a} vs {b}");
            }
            let f1 = operator_matrix(&t).eigenvalues();
            let f2 = operator_matrix(&t2).eigenvalues();
            for (a, b) in f1.iter().zip(&f2) {
                assert!((a - b).abs() < 1e-10, "full spectrum moved: {a} vs {b}");
            }
        }
    }
}
