//! Fourier machinery for π-periodic orientation densities.
//!
//! Orientations live on the half-circle `[0, π)` (a needle equals its
//! reversal), so densities expand in the even harmonics `e^{2inθ}`:
//!
//! ```text
//! p(θ_j) = Σ_n P_n e^{2inθ_j},   θ_j = jπ/M,   n ∈ [−M/2, M/2).
//! ```
//!
//! On that basis the operators used throughout are diagonal:
//!
//! * `∂_θ` ↦ `2in`, `∂²_θ` ↦ `−4n²`;
//! * the alignment interaction `W(θ) = |sin θ|` enters through
//!   `(W′ ∗ p)(θ) = ∫₀^π W′(θ−θ′) p(θ′) dθ′` with exact multiplier
//!   `ŵ_n = −4in/(4n²−1)` (from `|sin θ| = 2/π − (4/π) Σ cos 2nθ/(4n²−1)`).
//!
//! Position grids are handled by *discrete* symbols: the centred second
//! difference on an m-point periodic grid of spacing h acts on wavenumber k
//! as `−(2 − 2cos(2πk/m))/h²`, which is what implicit (FFT-diagonal) steps
//! must divide by to be exactly consistent with the explicit stencil.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Map an FFT bin index `k ∈ [0, m)` to its signed frequency in `[−m/2, m/2)`.
pub fn signed_frequency(k: usize, m: usize) -> i64 {
    debug_assert!(k < m);
    if k <= (m - 1) / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// Multiplier of `∂_θ` on `e^{2inθ}`.
pub fn derivative_multiplier(n: i64) -> Complex64 {
    Complex64::new(0.0, 2.0 * n as f64)
}

/// Multiplier of `∂²_θ` on `e^{2inθ}` (real, nonpositive).
pub fn second_derivative_multiplier(n: i64) -> f64 {
    -4.0 * (n * n) as f64
}

/// Multiplier of the alignment-interaction convolution `W′ ∗ ·` on
/// `e^{2inθ}`: `−4in/(4n²−1)`. Purely imaginary and odd in n; zero at n = 0.
pub fn wprime_multiplier(n: i64) -> Complex64 {
    let nf = n as f64;
    Complex64::new(0.0, -4.0 * nf / (4.0 * nf * nf - 1.0))
}

/// Symbol of the *negated* centred second difference `−δ²/h²` on an m-point
/// periodic grid: wavenumber bin k carries `(2 − 2cos(2πk/m))/h²` ≥ 0.
pub fn neg_laplacian_symbol(k: usize, m: usize, h: f64) -> f64 {
    let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
    (2.0 - 2.0 * angle.cos()) / (h * h)
}

/// Planned forward/inverse transforms of a fixed length, with the
/// `values = Σ_n P_n e^{2inθ}` normalization (forward divides by M).
pub struct AngularTransform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AngularTransform {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "need at least two angular nodes");
        let mut planner = FftPlanner::new();
        AngularTransform {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Grid angles θ_j = jπ/M.
    pub fn angles(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| j as f64 * std::f64::consts::PI / self.m as f64)
            .collect()
    }

    /// In-place forward transform (values → coefficients, including the 1/M).
    pub fn forward_inplace(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.m);
        self.forward.process(buf);
        let scale = 1.0 / self.m as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }

    /// In-place inverse transform (coefficients → values).
    pub fn inverse_inplace(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.m);
        self.inverse.process(buf);
    }

    /// Coefficients of a real sample vector.
    pub fn coefficients(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_inplace(&mut buf);
        buf
    }

    /// Real samples from coefficients (imaginary residue discarded; callers
    /// keep conjugate-symmetric spectra so it is at rounding level).
    pub fn values(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse_inplace(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Apply a frequency-domain multiplier to real samples, returning real
    /// samples: `out = F⁻¹[ mult(n) · F[values] ]`.
    pub fn apply_multiplier(&self, values: &[f64], mult: impl Fn(i64) -> Complex64) -> Vec<f64> {
        let mut buf = self.coefficients(values);
        for (k, c) in buf.iter_mut().enumerate() {
            *c *= mult(signed_frequency(k, self.m));
        }
        self.values(&buf)
    }

    /// The alignment-interaction convolution `W′ ∗ p` on the sample grid.
    pub fn convolve_wprime(&self, values: &[f64]) -> Vec<f64> {
        self.apply_multiplier(values, wprime_multiplier)
    }
}
