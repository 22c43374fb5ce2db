//! Latitude grid on the 2-sphere: midpoint co-latitude nodes with a positive
//! quadrature rule for the round measure sin ξ dξ dθ.
//!
//! The nodes ξ_i = (i + 1/2)π/N are Chebyshev points in x = cos ξ, so the
//! round-measure quadrature is Fejér's first rule times 2π: positive weights,
//! exact on cosine polynomials of degree < N, total mass exactly 4π.

use crate::error::{CoreError, Result};
use crate::transforms::Transforms;
use std::f64::consts::PI;
use std::sync::Arc;

struct GridInner {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    sin_xi: Vec<f64>,
    cos_xi: Vec<f64>,
    cot_xi: Vec<f64>,
    transforms: Transforms,
}

/// Co-latitude grid shared by all fields and metrics of one resolution.
#[derive(Clone)]
pub struct LatitudeGrid {
    inner: Arc<GridInner>,
}

impl std::fmt::Debug for LatitudeGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatitudeGrid").field("n", &self.inner.n).finish()
    }
}

impl PartialEq for LatitudeGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.n == other.inner.n
    }
}

impl LatitudeGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(CoreError::InvalidInput(format!("grid size {n} < 4")));
        }
        let nf = n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * PI / nf).collect();

        // Fejér-1 weights for ∫_{-1}^{1} f(x) dx at x_i = cos ξ_i, times 2π.
        let mut weights = vec![0.0; n];
        for (i, &xi) in nodes.iter().enumerate() {
            let mut s = 0.0;
            for m in 1..=(n / 2) {
                s += (2.0 * m as f64 * xi).cos() / (4.0 * (m * m) as f64 - 1.0);
            }
            weights[i] = (2.0 / nf) * (1.0 - 2.0 * s) * 2.0 * PI;
        }
        let total: f64 = weights.iter().sum();
        let scale = 4.0 * PI / total;
        for w in &mut weights {
            *w *= scale;
            if *w <= 0.0 {
                return Err(CoreError::InvalidInput(format!(
                    "non-positive quadrature weight at n = {n}"
                )));
            }
        }

        let sin_xi: Vec<f64> = nodes.iter().map(|x| x.sin()).collect();
        let cos_xi: Vec<f64> = nodes.iter().map(|x| x.cos()).collect();
        let cot_xi: Vec<f64> = nodes.iter().map(|x| x.cos() / x.sin()).collect();

        Ok(LatitudeGrid {
            inner: Arc::new(GridInner {
                n,
                nodes,
                weights,
                sin_xi,
                cos_xi,
                cot_xi,
                transforms: Transforms::new(n),
            }),
        })
    }

    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Co-latitude values ξ_i, strictly increasing in (0, π).
    pub fn nodes(&self) -> &[f64] {
        &self.inner.nodes
    }

    /// Quadrature weights for the round measure sin ξ dξ dθ; they sum to 4π.
    pub fn weights(&self) -> &[f64] {
        &self.inner.weights
    }

    pub fn sin_xi(&self) -> &[f64] {
        &self.inner.sin_xi
    }

    pub fn cos_xi(&self) -> &[f64] {
        &self.inner.cos_xi
    }

    pub fn cot_xi(&self) -> &[f64] {
        &self.inner.cot_xi
    }

    pub fn transforms(&self) -> &Transforms {
        &self.inner.transforms
    }

    /// Uniform node spacing π/N.
    pub fn spacing(&self) -> f64 {
        PI / self.inner.n as f64
    }

    /// ∫ f dA_round by quadrature.
    pub fn integrate_round(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        f.iter().zip(self.weights()).map(|(v, w)| v * w).sum()
    }

    /// ξ-derivative of an even (scalar-type) sample vector; result is odd.
    pub fn dxi_even(&self, f: &[f64], out: &mut [f64]) {
        let n = self.len();
        let t = self.transforms();
        let mut a = vec![0.0; n];
        t.cos_coeffs(f, &mut a);
        let mut s = vec![0.0; n];
        for l in 1..n {
            s[l - 1] = -(l as f64) * a[l];
        }
        t.sin_eval(&s, out);
    }

    /// ξ-derivative of an odd sample vector; result is even.
    pub fn dxi_odd(&self, f: &[f64], out: &mut [f64]) {
        let n = self.len();
        let t = self.transforms();
        let mut b = vec![0.0; n];
        t.sin_coeffs(f, &mut b);
        let mut c = vec![0.0; n];
        // mode N cosine vanishes identically at the nodes
        for m in 1..n {
            c[m] = m as f64 * b[m - 1];
        }
        t.cos_eval(&c, out);
    }

    /// Round Laplace–Beltrami operator Δ₀ f = f_ξξ + cot ξ · f_ξ on an even
    /// sample vector. The image of a degree-l cosine mode is again a cosine
    /// polynomial of degree l, so quadrature annihilates Δ₀ f exactly.
    pub fn delta0(&self, f: &[f64], out: &mut [f64]) {
        let n = self.len();
        let t = self.transforms();
        let mut a = vec![0.0; n];
        t.cos_coeffs(f, &mut a);

        let mut c2 = vec![0.0; n];
        for l in 1..n {
            c2[l] = -((l * l) as f64) * a[l];
        }
        let mut fxx = vec![0.0; n];
        t.cos_eval(&c2, &mut fxx);

        let mut s = vec![0.0; n];
        for l in 1..n {
            s[l - 1] = -(l as f64) * a[l];
        }
        let mut fx = vec![0.0; n];
        t.sin_eval(&s, &mut fx);

        let cot = self.cot_xi();
        for i in 0..n {
            out[i] = fxx[i] + cot[i] * fx[i];
        }
    }

    /// Solve Δ₀ h = b for the cosine coefficients of h, mode 0 left at zero.
    ///
    /// In coefficient space Δ₀ acts as a lower-triangular parity-preserving
    /// matrix: column l has diagonal −l(l+1), entries −2l on modes
    /// l−2, l−4, …, and −l on mode 0 for even l. Returns (coeffs, r0) where
    /// r0 is the residual of the mode-0 equation (zero iff b is compatible).
    pub fn delta0_solve_coeffs(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let n = self.len();
        let t = self.transforms();
        let mut bh = vec![0.0; n];
        t.cos_coeffs(b, &mut bh);

        let mut a = vec![0.0; n];
        for l in (1..n).rev() {
            let lf = l as f64;
            let al = bh[l] / (-lf * (lf + 1.0));
            a[l] = al;
            let mut m = l as isize - 2;
            while m >= 1 {
                bh[m as usize] += 2.0 * lf * al;
                m -= 2;
            }
            if l % 2 == 0 {
                bh[0] += lf * al;
            }
        }
        (a, bh[0])
    }
}
