//! Trigonometric transforms on the midpoint grid ξ_i = (i + 1/2)π/N.
//!
//! Smooth rotationally symmetric scalars extend evenly across both poles and
//! are represented by cosine series; odd-extending profiles (first ξ-derivatives,
//! even-sector vector field profiles) live in the sine basis.
//!
//! Coefficient slice conventions, both of length N:
//!   cos slice: slot `l` holds the coefficient of cos(l ξ), l = 0..N-1.
//!   sin slice: slot `l` holds the coefficient of sin((l+1) ξ), modes 1..N.
//!
//! Everything runs through one complex FFT of length 2N (forward) or a
//! pre-twiddled inverse FFT of length 2N (evaluation), so a full
//! analyze/evaluate pair costs O(N log N).

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub struct Transforms {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// e^{-i k π / (2N)} for k = 0..2N-1
    tw_fwd: Vec<Complex64>,
    /// e^{+i l π / (2N)} for l = 0..2N-1
    tw_eval: Vec<Complex64>,
}

impl std::fmt::Debug for Transforms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transforms").field("n", &self.n).finish()
    }
}

impl Transforms {
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "grid too small");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(2 * n);
        let inv = planner.plan_fft_inverse(2 * n);
        let tw_fwd = (0..2 * n)
            .map(|k| Complex64::from_polar(1.0, -(k as f64) * PI / (2.0 * n as f64)))
            .collect();
        let tw_eval = (0..2 * n)
            .map(|l| Complex64::from_polar(1.0, (l as f64) * PI / (2.0 * n as f64)))
            .collect();
        Transforms { n, fwd, inv, tw_fwd, tw_eval }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Raw moments X^c_k = Σ_n x_n cos(k ξ_n) and X^s_k = Σ_n x_n sin(k ξ_n)
    /// for k = 0..N, from a single length-2N FFT.
    fn moments(&self, samples: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        debug_assert_eq!(samples.len(), n);
        let mut buf: Vec<Complex64> = samples
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)).take(n))
            .collect();
        self.fwd.process(&mut buf);
        let mut c = vec![0.0; n + 1];
        let mut s = vec![0.0; n + 1];
        for k in 0..=n {
            let v = self.tw_fwd[k % (2 * n)] * buf[k % (2 * n)];
            c[k] = v.re;
            s[k] = -v.im;
        }
        (c, s)
    }

    /// Cosine coefficients of the interpolant through `samples`.
    pub fn cos_coeffs(&self, samples: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(out.len(), n);
        let (c, _) = self.moments(samples);
        out[0] = c[0] / n as f64;
        for l in 1..n {
            out[l] = 2.0 * c[l] / n as f64;
        }
    }

    /// Sine coefficients (modes 1..N) of the interpolant through `samples`.
    pub fn sin_coeffs(&self, samples: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(out.len(), n);
        let (_, s) = self.moments(samples);
        for l in 1..n {
            out[l - 1] = 2.0 * s[l] / n as f64;
        }
        out[n - 1] = s[n] / n as f64;
    }

    /// Evaluate Σ_l w_l e^{i l ξ_j} at the grid nodes, w given on modes 0..N.
    fn eval_complex(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert!(modes.len() <= n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
        for (l, &w) in modes.iter().enumerate() {
            buf[l] = w * self.tw_eval[l];
        }
        self.inv.process(&mut buf);
        buf.truncate(n);
        buf
    }

    /// Evaluate a cosine series at the nodes.
    pub fn cos_eval(&self, coeffs: &[f64], out: &mut [f64]) {
        let modes: Vec<Complex64> = coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        let vals = self.eval_complex(&modes);
        for (o, v) in out.iter_mut().zip(vals) {
            *o = v.re;
        }
    }

    /// Evaluate a sine series (modes 1..N) at the nodes.
    pub fn sin_eval(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut modes = vec![Complex64::new(0.0, 0.0); n + 1];
        for l in 1..=n {
            modes[l] = Complex64::new(coeffs[l - 1], 0.0);
        }
        let vals = self.eval_complex(&modes);
        for (o, v) in out.iter_mut().zip(vals) {
            *o = v.im;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) * PI / n as f64).collect()
    }

    fn naive_cos_eval(coeffs: &[f64], xi: &[f64]) -> Vec<f64> {
        xi.iter()
            .map(|&x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(l, &a)| a * (l as f64 * x).cos())
                    .sum()
            })
            .collect()
    }

    fn naive_sin_eval(coeffs: &[f64], xi: &[f64]) -> Vec<f64> {
        xi.iter()
            .map(|&x| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(l, &b)| b * ((l + 1) as f64 * x).sin())
                    .sum()
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        // xorshift; plenty for transform tests
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state as f64 / u64::MAX as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn cos_roundtrip_matches_naive() {
        for &n in &[8, 64, 129] {
            let t = Transforms::new(n);
            let xi = nodes(n);
            let coeffs = pseudo_random(n, 7);
            let samples = naive_cos_eval(&coeffs, &xi);

            let mut fast = vec![0.0; n];
            t.cos_eval(&coeffs, &mut fast);
            for (a, b) in fast.iter().zip(&samples) {
                assert!((a - b).abs() < 1e-10 * n as f64, "n={n}");
            }

            let mut back = vec![0.0; n];
            t.cos_coeffs(&samples, &mut back);
            for (a, b) in back.iter().zip(&coeffs) {
                assert!((a - b).abs() < 1e-10 * n as f64, "n={n}");
            }
        }
    }

    #[test]
    fn sin_roundtrip_matches_naive() {
        for &n in &[8, 64, 129] {
            let t = Transforms::new(n);
            let xi = nodes(n);
            let coeffs = pseudo_random(n, 13);
            let samples = naive_sin_eval(&coeffs, &xi);

            let mut fast = vec![0.0; n];
            t.sin_eval(&coeffs, &mut fast);
            for (a, b) in fast.iter().zip(&samples) {
                assert!((a - b).abs() < 1e-10 * n as f64, "n={n}");
            }

            let mut back = vec![0.0; n];
            t.sin_coeffs(&samples, &mut back);
            for (a, b) in back.iter().zip(&coeffs) {
                assert!((a - b).abs() < 1e-10 * n as f64, "n={n}");
            }
        }
    }
}
