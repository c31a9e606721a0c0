//! Closed-form evaluation of the conformal-map constant `a(θ̃)`.
//!
//! The exterior of the excluded rhombus is the image of the unit disk under a
//! Schwarz–Christoffel map `g(ζ) = a₀ + a ∫ (1−t²)^{s}(1+t²)^{1−s} t^{−2} dt`
//! with `s = θ̃/π`; the complex constant `a = a(θ̃)` fixes the scale so the
//! rhombus has unit side. Its closed form involves Gauss hypergeometric
//! functions at argument −1 whose textbook pieces individually diverge at
//! `θ̃ = π/2`; this module evaluates an equivalent pole-free rearrangement
//!
//! ```text
//! a(θ̃) = 1 / (P(s) − i·Q(s)),
//! P(s) = π Γ(1+2s) K_β(s) / (Γ(1/2+s) 2^{1+2s}),
//! Q(s) = 2^{2s−2} π Γ(1/2+s) K_γ(s) / (sin(πs) Γ(2s)),
//! K_β(s) = F̄(1/2, s; 3/2+s; −1) − 2 F̄(−1/2, s; 1/2+s; −1),
//! K_γ(s) = F̄(1/2, −s; 3/2−s; −1) + 2 F̄(−1/2, −s; 1/2−s; −1),
//! ```
//!
//! where `F̄` is the *regularized* Gauss function `₂F₁/Γ(c)` (entire in `c`,
//! which is what removes the `Γ` poles). `K_β(0) = 0` and `K_γ(1) = 0` make
//! the endpoint limits finite: `a(0⁺) = i/2`, `a(π⁻) = −1/2`.
//!
//! For `s > 1/2` the reflection `a(π − θ̃) = −i · conj(a(θ̃))` is applied
//! first, so the series below only ever run with `s ≤ 1/2`, where every
//! `Γ`-argument is nonnegative and the evaluation is uniformly stable.

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Maximum series length; the argument-1/2 series gains a binary digit per
/// term, so ~60 terms reach f64 precision with generous margin.
const MAX_SERIES_TERMS: usize = 200;

/// Relative term-size stopping threshold for the hypergeometric series.
const SERIES_EPS: f64 = 1e-17;

/// Reciprocal gamma `1/Γ(x)` for `x ≥ 0`, with `1/Γ(0) = 0` (entire limit).
fn rgamma(x: f64) -> f64 {
    debug_assert!(x >= 0.0, "rgamma argument must be nonnegative, got {x}");
    if x == 0.0 {
        0.0
    } else {
        (-ln_gamma(x)).exp()
    }
}

/// Gamma function for `x > 0`.
fn gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma(x).exp()
}

/// Regularized Gauss hypergeometric `F̄(a, b; c; −1) = ₂F₁(a, b; c; −1)/Γ(c)`.
///
/// Evaluated through the Pfaff transformation to argument 1/2,
/// `F̄(a,b;c;−1) = 2^{−b} Σ_k (c−a)_k (b)_k (1/2)^k / (k! Γ(c+k))`,
/// which converges geometrically (ratio → 1/2) instead of the slow
/// alternating series at −1. Requires `c ≥ 0` (all uses satisfy this after
/// the `s ≤ 1/2` reflection); `c = 0` is fine because `1/Γ` is entire.
pub fn hyp2f1_reg_neg1(a: f64, b: f64, c: f64) -> f64 {
    debug_assert!(c >= 0.0, "series restricted to c >= 0, got c = {c}");
    let mut poch = 1.0; // (c−a)_k (b)_k (1/2)^k / k!
    let mut rg = rgamma(c); // 1/Γ(c+k)
    let mut sum = 0.0;
    for k in 0..MAX_SERIES_TERMS {
        let term = poch * rg;
        sum += term;
        if k > 4 && term.abs() <= SERIES_EPS * sum.abs() {
            break;
        }
        let kf = k as f64;
        poch *= (c - a + kf) * (b + kf) * 0.5 / (kf + 1.0);
        // Γ(c+k+1) = (c+k)Γ(c+k); when c+k = 0 the next value is Γ(1) = 1.
        rg = if c + kf == 0.0 { 1.0 } else { rg / (c + kf) };
    }
    2.0_f64.powf(-b) * sum
}

/// The real pair `(P(s), Q(s))` of the pole-free rearrangement; `s ∈ [0, 1/2]`.
fn p_q(s: f64) -> (f64, f64) {
    let k_beta = hyp2f1_reg_neg1(0.5, s, 1.5 + s) - 2.0 * hyp2f1_reg_neg1(-0.5, s, 0.5 + s);
    let k_gamma = hyp2f1_reg_neg1(0.5, -s, 1.5 - s) + 2.0 * hyp2f1_reg_neg1(-0.5, -s, 0.5 - s);
    let p =
        PI * gamma_pos(1.0 + 2.0 * s) * k_beta / (gamma_pos(0.5 + s) * 2.0_f64.powf(1.0 + 2.0 * s));
    // sin(πs)Γ(2s) → π/2 as s → 0⁺; both factors are benign in f64 for s > 0.
    let sg = if s == 0.0 {
        0.5 * PI
    } else {
        (PI * s).sin() * gamma_pos(2.0 * s)
    };
    let q = 2.0_f64.powf(2.0 * s - 2.0) * PI * gamma_pos(0.5 + s) * k_gamma / sg;
    (p, q)
}

/// Closed-form `a(θ̃)` for `θ̃ ∈ [0, π]` (endpoints are the one-sided limits
/// `a(0) = i/2`, `a(π) = −1/2`).
pub fn closed_form_a(theta: f64) -> Complex64 {
    let s = theta / PI;
    debug_assert!((0.0..=1.0).contains(&s), "theta out of [0, π]: {theta}");
    if s > 0.5 {
        // a(π−θ̃) = −i·conj(a(θ̃)): maps to the stable half and enforces the
        // reflection symmetry of the response matrix exactly.
        let ar = closed_form_a(PI - theta);
        return Complex64::new(0.0, -1.0) * ar.conj();
    }
    let (p, q) = p_q(s);
    Complex64::new(1.0, 0.0) / Complex64::new(p, -q)
}
