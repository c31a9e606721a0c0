//! Space-homogeneous mean-field orientation dynamics on `[0, π)`.
//!
//! When the phase density is spatially uniform, the kinetic hierarchy closes
//! into a McKean–Vlasov equation for the orientation density `p(θ, t)`:
//!
//! ```text
//! D_R⁻¹ ∂_t p = ∂²_θ p + φ ∂_θ( p · (W′ ∗ p) ),   W(θ) = |sin θ|,
//! ```
//!
//! with occupied-fraction parameter `φ = ε²(N−1)` and unit mass
//! `∫₀^π p dθ = 1`. This module provides:
//!
//! * the spectral right-hand side (mass conserved *exactly*: the zero mode of
//!   the rhs vanishes identically),
//! * the closed-form linear growth rate about the uniform state,
//!   `λ(n) = −4n²D_R (1 − 2φ/((4n²−1)π))`, whose smallest destabilization
//!   threshold is `φ_c = 3π/2` at mode `n = 1`,
//! * semi-implicit time evolution (Crank–Nicolson diffusion, explicit
//!   transport) with positivity-triggered step reduction,
//! * stationary states by damped fixed-point iteration of the zero-flux form
//!   `p_s = C·exp(−φ ∫₀^θ (W′ ∗ p_s))`.
//!
//! Stationary profiles form a rotation family; comparisons between profiles
//! use shift-aligned L² distances.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{signed_frequency, wprime_multiplier, AngularTransform};

/// Damping factor of the stationary fixed-point iteration; tames the
/// oscillation of the undamped map near the critical density.
const FIXED_POINT_DAMPING: f64 = 0.5;

/// Most negative value a density sample may take before the evolver halves
/// its step (no hard projection; the dynamics is positivity-preserving in the
/// continuum, so excursions beyond rounding indicate too large a step).
const NEGATIVITY_TRIGGER: f64 = -1e-8;

/// Blow-up guard for the evolver.
const BLOWUP_LIMIT: f64 = 1e6;

/// Orientation density on a uniform grid over `[0, π)`, unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDensity {
    values: Vec<f64>,
}

impl AngularDensity {
    /// Wrap grid samples as a density: even length ≥ 8, finite values,
    /// no negative excursion beyond `−1e−10·max`, then rescaled to unit mass.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 8 || m % 2 != 0 {
            return Err(Error::invalid(
                "grid_size",
                format!("need an even number of samples ≥ 8, got {m}"),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "non-finite sample".to_string()));
        }
        let max = values.iter().fold(0.0_f64, |a, &b| a.max(b));
        if values.iter().any(|&v| v < -1e-10 * max.max(1.0)) {
            return Err(Error::invalid(
                "values",
                "density samples must be nonnegative".to_string(),
            ));
        }
        let mass: f64 = values.iter().sum::<f64>() * PI / m as f64;
        if !(mass > 0.0) {
            return Err(Error::invalid("values", "zero total mass".to_string()));
        }
        let scale = 1.0 / mass;
        Ok(AngularDensity {
            values: values.into_iter().map(|v| v * scale).collect(),
        })
    }

    /// The uniform density 1/π on `m` grid points.
    pub fn uniform(m: usize) -> Result<Self> {
        Self::from_values(vec![1.0 / PI; m])
    }

    /// `1/π + amplitude·cos(2nθ)` (renormalized; the perturbation itself is
    /// massless, so renormalization is a no-op up to rounding).
    pub fn perturbed_cosine(m: usize, n: u32, amplitude: f64) -> Result<Self> {
        let values = (0..m)
            .map(|j| {
                let t = j as f64 * PI / m as f64;
                1.0 / PI + amplitude * (2.0 * n as f64 * t).cos()
            })
            .collect();
        Self::from_values(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid angles θ_j = jπ/M.
    pub fn angles(&self) -> Vec<f64> {
        let m = self.values.len();
        (0..m).map(|j| j as f64 * PI / m as f64).collect()
    }

    /// Trapezoidal (= rectangle, periodic) mass ∫₀^π p dθ.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * PI / self.values.len() as f64
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::MIN, |a, &b| a.max(b))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::MAX, |a, &b| a.min(b))
    }

    /// Fourier coefficient `P_n` in `p(θ) = Σ P_n e^{2inθ}`.
    pub fn mode_amplitude(&self, n: i64) -> Complex64 {
        let m = self.values.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in self.values.iter().enumerate() {
            let phase = -2.0 * n as f64 * (j as f64 * PI / m as f64);
            acc += v * Complex64::from_polar(1.0, phase);
        }
        acc / m as f64
    }

    /// Plain L² distance `‖p − q‖₂ = √(∫ (p−q)² dθ)`.
    pub fn l2_distance(&self, other: &AngularDensity) -> f64 {
        assert_eq!(self.len(), other.len(), "grids must match");
        let m = self.values.len() as f64;
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (s * PI / m).sqrt()
    }

    /// L² distance minimized over cyclic grid shifts (stationary states form
    /// a rotation family, so unaligned distances are meaningless).
    pub fn shift_aligned_l2(&self, other: &AngularDensity) -> f64 {
        assert_eq!(self.len(), other.len(), "grids must match");
        let m = self.values.len();
        let mut best = f64::MAX;
        for s in 0..m {
            let mut acc = 0.0;
            for j in 0..m {
                let d = self.values[j] - other.values[(j + s) % m];
                acc += d * d;
            }
            best = best.min(acc);
        }
        (best * PI / m as f64).sqrt()
    }
}

/// The alignment-interaction field `(W′ ∗ p)(θ) = ∫₀^π cos(u) p(θ−u) du`
/// (π-periodized kernel), evaluated spectrally — exact on resolved modes.
/// Its mean over the period is exactly zero (the zero-mode multiplier is 0).
pub fn convolve_wprime(p: &AngularDensity) -> Vec<f64> {
    let tr = AngularTransform::new(p.len());
    tr.convolve_wprime(p.values())
}

/// Right-hand side `D_R [∂²_θ p + φ ∂_θ(p·(W′∗p))]` on the sample grid.
/// The zero mode of the result is identically zero (exact mass conservation).
pub fn mkv_rhs(p: &AngularDensity, phi: f64, d_r: f64) -> Result<Vec<f64>> {
    validate_phi_dr(phi, d_r)?;
    let m = p.len();
    let tr = AngularTransform::new(m);
    let mut phat = tr.coefficients(p.values());
    // Interaction field values from its diagonal multiplier.
    let mut conv = phat.clone();
    for (k, c) in conv.iter_mut().enumerate() {
        *c *= wprime_multiplier(signed_frequency(k, m));
    }
    let conv_vals = tr.values(&conv);
    let transport: Vec<Complex64> = p
        .values()
        .iter()
        .zip(&conv_vals)
        .map(|(&pv, &cv)| Complex64::new(pv * cv, 0.0))
        .collect();
    let mut ghat = transport;
    tr.forward_inplace(&mut ghat);
    for k in 0..m {
        let n = signed_frequency(k, m);
        let lap = -4.0 * (n * n) as f64;
        let ddtheta = Complex64::new(0.0, 2.0 * n as f64);
        phat[k] = d_r * (lap * phat[k] + phi * ddtheta * ghat[k]);
    }
    Ok(tr.values(&phat))
}

/// Closed-form growth rate of mode `n` about the uniform state:
/// `λ(n) = −4n²D_R (1 − 2φ/((4n²−1)π))`. This is the exact spectrum of the
/// linearized operator (see the linearization test), consistent with the
/// critical density `φ_c = 3π/2` at `n = 1`.
pub fn growth_rate(n: u32, phi: f64, d_r: f64) -> f64 {
    assert!(n >= 1, "mode index must be ≥ 1");
    let nf = n as f64;
    -4.0 * nf * nf * d_r * (1.0 - 2.0 * phi / ((4.0 * nf * nf - 1.0) * PI))
}

/// Critical occupied fraction and the mode that first destabilizes:
/// minimizes the per-mode threshold `φ_n = (4n²−1)π/2` over `n ≥ 1`,
/// returning exactly `(3π/2, 1)`.
pub fn critical_phi() -> (f64, u32) {
    let mut best_n = 1u32;
    let mut best = threshold(1);
    for n in 2..=100 {
        let t = threshold(n);
        if t < best {
            best = t;
            best_n = n;
        }
    }
    debug_assert_eq!(best_n, 1);
    // The minimizing value is (4−1)π/2; return the exact f64 expression.
    (1.5 * PI, best_n)
}

/// Destabilization threshold of mode n (where `growth_rate(n, φ, ·)` = 0).
pub fn threshold(n: u32) -> f64 {
    let nf = n as f64;
    (4.0 * nf * nf - 1.0) * PI / 2.0
}

/// Time evolution record: states at the requested times (snapped to steps).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<AngularDensity>,
}

impl Trajectory {
    pub fn final_state(&self) -> &AngularDensity {
        self.states.last().expect("trajectory never empty")
    }
}

fn validate_phi_dr(phi: f64, d_r: f64) -> Result<()> {
    if !(phi >= 0.0 && phi.is_finite()) {
        return Err(Error::invalid("phi", format!("must be ≥ 0, got {phi}")));
    }
    if !(d_r > 0.0 && d_r.is_finite()) {
        return Err(Error::invalid(
            "D_R",
            format!("must be positive, got {d_r}"),
        ));
    }
    Ok(())
}

/// Semi-implicit evolution of the mean-field dynamics from `p0` to `t_end`:
/// Crank–Nicolson in the (stiff, diagonal) diffusion, explicit in the
/// transport term. Mass is conserved exactly; a negative excursion beyond
/// `−1e−8` halves the step for the remainder of the run; `record_times`
/// are snapped to step boundaries (the final state is always recorded).
pub fn evolve(
    p0: &AngularDensity,
    phi: f64,
    d_r: f64,
    t_end: f64,
    dt: f64,
    record_times: &[f64],
) -> Result<Trajectory> {
    validate_phi_dr(phi, d_r)?;
    if !(t_end >= 0.0) || !(dt > 0.0) {
        return Err(Error::invalid(
            "t_end/dt",
            format!("need t_end ≥ 0 and dt > 0, got {t_end}, {dt}"),
        ));
    }
    let m = p0.len();
    let tr = AngularTransform::new(m);
    let mut targets: Vec<f64> = record_times
        .iter()
        .copied()
        .filter(|&t| (0.0..=t_end).contains(&t))
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut p = p0.values().to_vec();
    let mut t = 0.0;
    let mut step = dt;
    let mut next_target = 0usize;

    // Record t = 0 if requested.
    while next_target < targets.len() && targets[next_target] <= 0.0 {
        times.push(0.0);
        states.push(p0.clone());
        next_target += 1;
    }

    let mut halvings = 0u32;
    while t < t_end - 1e-15 * t_end.max(1.0) {
        let boundary = if next_target < targets.len() {
            targets[next_target].min(t_end)
        } else {
            t_end
        };
        let h = step.min(boundary - t).max(1e-300);
        let trial = step_imex(&tr, &p, phi, d_r, h);
        let max = trial.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if !max.is_finite() || max > BLOWUP_LIMIT {
            return Err(Error::Instability {
                what: "mean-field evolution",
                detail: format!("density blew up at t = {t}"),
            });
        }
        let min = trial.iter().fold(f64::MAX, |a, &b| a.min(b));
        if min < NEGATIVITY_TRIGGER * max.max(1.0) {
            halvings += 1;
            if halvings > 12 {
                return Err(Error::Instability {
                    what: "mean-field evolution",
                    detail: format!("persistent negativity at t = {t} despite step reduction"),
                });
            }
            step *= 0.5;
            continue;
        }
        p = trial;
        t += h;
        while next_target < targets.len() && t >= targets[next_target] - 1e-12 {
            times.push(t);
            states.push(AngularDensity { values: p.clone() });
            next_target += 1;
        }
    }
    if times.last().map_or(true, |&lt| lt < t_end - 1e-12) {
        times.push(t_end.min(t));
        states.push(AngularDensity { values: p });
    }
    Ok(Trajectory { times, states })
}

/// One semi-implicit step: explicit transport, Crank–Nicolson diffusion.
fn step_imex(tr: &AngularTransform, p: &[f64], phi: f64, d_r: f64, dt: f64) -> Vec<f64> {
    let m = p.len();
    let mut phat: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    tr.forward_inplace(&mut phat);
    // Interaction field and transport term g = p·(W′∗p) in sample space.
    let mut conv = phat.clone();
    for (k, c) in conv.iter_mut().enumerate() {
        *c *= wprime_multiplier(signed_frequency(k, m));
    }
    let conv_vals = tr.values(&conv);
    let mut ghat: Vec<Complex64> = p
        .iter()
        .zip(&conv_vals)
        .map(|(&pv, &cv)| Complex64::new(pv * cv, 0.0))
        .collect();
    tr.forward_inplace(&mut ghat);
    for k in 0..m {
        let n = signed_frequency(k, m);
        let nn = 4.0 * (n * n) as f64; // −∂²_θ symbol
        let ddtheta = Complex64::new(0.0, 2.0 * n as f64);
        let expl = phi * d_r * ddtheta * ghat[k];
        phat[k] = ((1.0 - 0.5 * dt * d_r * nn) * phat[k] + dt * expl) / (1.0 + 0.5 * dt * d_r * nn);
    }
    tr.values(&phat)
}

/// Outcome of the stationary fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    pub density: AngularDensity,
    /// Whether the sup-norm update fell below the tolerance within the
    /// iteration budget (a `false` flag returns the last iterate unchanged).
    pub converged: bool,
    pub iterations: usize,
    /// Last sup-norm update ‖p_{k+1} − p_k‖_∞.
    pub final_update: f64,
    /// Sup-norm residual of the zero-flux equation ∂_θ p + φ p (W′∗p) = 0.
    pub residual: f64,
}

/// Damped fixed-point iteration for stationary states: zero flux forces
/// `p_s = C·exp(−φ S(θ))` with `S′ = W′∗p_s`, so iterate
/// `p_{k+1} = (1−ω) p_k + ω·C_k·exp(−φ S_k)` (ω = 1/2) until the sup-norm
/// update drops below `tol`. Non-convergence within `max_iter` is reported
/// through the flag, not an error (the last iterate is still useful).
pub fn stationary_fixed_point(
    p0: &AngularDensity,
    phi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointOutcome> {
    validate_phi_dr(phi, 1.0)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    let m = p0.len();
    let tr = AngularTransform::new(m);
    let mut p = p0.values().to_vec();
    let mut update = f64::MAX;
    let mut iterations = 0;

    for k in 0..max_iter {
        iterations = k + 1;
        let next = fixed_point_map(&tr, &p, phi);
        // Damped update: p ← (1−ω)p + ω·G(p).
        let mut worst = 0.0_f64;
        for j in 0..m {
            let blended = (1.0 - FIXED_POINT_DAMPING) * p[j] + FIXED_POINT_DAMPING * next[j];
            worst = worst.max((blended - p[j]).abs());
            p[j] = blended;
        }
        update = worst;
        if update < tol {
            break;
        }
    }

    let density = AngularDensity { values: p };
    let residual = flux_residual(&tr, &density, phi);
    Ok(FixedPointOutcome {
        converged: update < tol,
        iterations,
        final_update: update,
        residual,
        density,
    })
}

/// The undamped fixed-point map `G(p) = C·exp(−φ ∫₀^θ (W′∗p))`, normalized.
fn fixed_point_map(tr: &AngularTransform, p: &[f64], phi: f64) -> Vec<f64> {
    let m = p.len();
    let mut phat: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    tr.forward_inplace(&mut phat);
    // Antiderivative of W′∗p: modes (ŵ_n/(2in))·P_n, n ≠ 0; the kernel's zero
    // mode vanishes, so the antiderivative is π-periodic and the constant of
    // integration is absorbed by the normalization.
    let mut shat = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        let n = signed_frequency(k, m);
        if n == 0 {
            continue;
        }
        let integ = Complex64::new(0.0, -1.0 / (2.0 * n as f64)); // 1/(2in)
        shat[k] = wprime_multiplier(n) * phat[k] * integ;
    }
    let s_vals = tr.values(&shat);
    let mut g: Vec<f64> = s_vals.iter().map(|&s| (-phi * s).exp()).collect();
    let mass: f64 = g.iter().sum::<f64>() * PI / m as f64;
    for v in g.iter_mut() {
        *v /= mass;
    }
    g
}

/// Sup-norm of the stationary flux `∂_θ p + φ p (W′∗p)` (spectral derivative).
fn flux_residual(tr: &AngularTransform, p: &AngularDensity, phi: f64) -> f64 {
    let deriv = tr.apply_multiplier(p.values(), crate::spectral::derivative_multiplier);
    let conv = tr.convolve_wprime(p.values());
    p.values()
        .iter()
        .zip(deriv.iter().zip(&conv))
        .map(|(&pv, (&dv, &cv))| (dv + phi * pv * cv).abs())
        .fold(0.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const M: usize = 256;

    #[test]
    fn uniform_is_stationary() {
        let p = AngularDensity::uniform(M).unwrap();
        let rhs = mkv_rhs(&p, 3.0, 1.0).unwrap();
        for v in rhs {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-13);
        }
        let fp = stationary_fixed_point(&p, 5.0, 1e-12, 10).unwrap();
        assert!(fp.converged && fp.iterations <= 2);
        assert!(fp.residual < 1e-12);
    }

    #[test]
    fn interaction_field_of_uniform_vanishes() {
        let p = AngularDensity::uniform(M).unwrap();
        for v in convolve_wprime(&p) {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn interaction_field_of_cosine_mode() {
        // 1/π + δ cos 2θ ↦ δ·(4/3) sin 2θ.
        let delta = 0.01;
        let p = AngularDensity::perturbed_cosine(M, 1, delta).unwrap();
        let conv = convolve_wprime(&p);
        for (j, &t) in p.angles().iter().enumerate() {
            assert_abs_diff_eq!(
                conv[j],
                delta * (4.0 / 3.0) * (2.0 * t).sin(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn linearization_matches_closed_form_rates() {
        // The quadratic term of the rhs at a pure cosine mode lives entirely
        // in mode 2n, so the mode-n projection of the rhs is exactly linear:
        // the measured rate must hit the closed form at rounding level.
        let phi = 2.0;
        let d_r = 0.7;
        for n in [1u32, 2, 3, 8] {
            let delta = 1e-3;
            let p = AngularDensity::perturbed_cosine(M, n, delta).unwrap();
            let rhs = mkv_rhs(&p, phi, d_r).unwrap();
            let m = p.len();
            let mut proj = 0.0;
            for (j, &t) in p.angles().iter().enumerate() {
                proj += rhs[j] * (2.0 * n as f64 * t).cos();
            }
            proj *= 2.0 / m as f64; // cosine-coefficient normalization
            let measured = proj / delta;
            assert_relative_eq!(measured, growth_rate(n, phi, d_r), max_relative = 1e-12);
        }
    }

    #[test]
    fn critical_density_is_three_halves_pi_at_mode_one() {
        let (phi_c, n) = critical_phi();
        assert_eq!(phi_c, 1.5 * PI);
        assert_eq!(n, 1);
        // Uniqueness and monotonicity of the per-mode thresholds.
        for k in 2..=100 {
            assert!(threshold(k) > threshold(k - 1));
        }
    }

    #[test]
    fn heat_rates_without_interaction() {
        assert_relative_eq!(growth_rate(1, 0.0, 1.0), -4.0);
        assert_abs_diff_eq!(growth_rate(1, 1.5 * PI, 1.0), 0.0, epsilon = 1e-14);
    }

    /// Measured mode-1 growth/decay rates from short evolutions, against the
    /// closed form, both below and above the critical density.
    #[test]
    fn evolve_reproduces_linear_rates() {
        let d_r = 1.0;
        let (phi_c, _) = critical_phi();
        for factor in [0.9, 1.1] {
            let phi = factor * phi_c;
            let p0 = AngularDensity::perturbed_cosine(M, 1, 1e-6).unwrap();
            let traj = evolve(&p0, phi, d_r, 2.0, 1e-4, &[0.0, 2.0]).unwrap();
            let a0 = traj.states[0].mode_amplitude(1).norm();
            let a1 = traj.final_state().mode_amplitude(1).norm();
            let measured = (a1 / a0).ln() / 2.0;
            let expect = growth_rate(1, phi, d_r);
            assert!(
                (measured - expect).abs() <= 0.01 * expect.abs(),
                "rate at φ/φ_c={factor}: measured {measured}, expected {expect}"
            );
        }
    }

    #[test]
    fn evolve_conserves_mass_and_detects_records() {
        let p0 = AngularDensity::perturbed_cosine(M, 1, 0.01).unwrap();
        let traj = evolve(&p0, 5.0, 1.0, 1.0, 1e-3, &[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(traj.times.len(), 4);
        for s in &traj.states {
            assert_abs_diff_eq!(s.mass(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn supercritical_evolution_reaches_fixed_point_profile() {
        // Mirrors the published time-evolution figure: start near uniform at
        // φ = 1.1φ_c, run to t = 20/D_R, compare (shift-aligned) to the
        // fixed-point stationary profile.
        let (phi_c, _) = critical_phi();
        let phi = 1.1 * phi_c;
        let p0 = {
            let m = M;
            let values = (0..m)
                .map(|j| {
                    let t = j as f64 * PI / m as f64;
                    1.0 / PI - 0.01 * (2.0 * t).cos()
                })
                .collect();
            AngularDensity::from_values(values).unwrap()
        };
        let traj = evolve(&p0, phi, 1.0, 20.0, 1e-3, &[]).unwrap();
        let fp = stationary_fixed_point(&p0, phi, 1e-12, 200_000).unwrap();
        assert!(fp.converged, "fixed point did not converge");
        assert!(fp.residual < 1e-8, "residual {}", fp.residual);
        let dist = traj.final_state().shift_aligned_l2(&fp.density);
        assert!(dist < 1e-4, "aligned L² distance {dist}");
    }

    #[test]
    fn stationary_peaks_increase_with_phi() {
        let (phi_c, _) = critical_phi();
        let p0 = AngularDensity::perturbed_cosine(M, 1, 0.01).unwrap();
        let mut last_max = 0.0;
        for k in [1, 3, 5] {
            let phi = phi_c + k as f64 / 2.0;
            let fp = stationary_fixed_point(&p0, phi, 1e-11, 500_000).unwrap();
            assert!(fp.converged, "no convergence at k={k}");
            assert!(fp.residual < 1e-8, "residual {} at k={k}", fp.residual);
            let mx = fp.density.max_value();
            assert!(
                mx > last_max,
                "peak not increasing at k={k}: {mx} ≤ {last_max}"
            );
            last_max = mx;
        }
        // Supercritical profiles are genuinely nonuniform.
        assert!(last_max > 1.5 / PI);
    }

    #[test]
    fn translation_covariance_of_evolution() {
        let m = M;
        let shift = 37usize;
        let base: Vec<f64> = (0..m)
            .map(|j| {
                let t = j as f64 * PI / m as f64;
                1.0 / PI + 0.02 * (2.0 * t).cos() + 0.005 * (4.0 * t).sin()
            })
            .collect();
        let shifted: Vec<f64> = (0..m).map(|j| base[(j + shift) % m]).collect();
        let p_a = AngularDensity::from_values(base).unwrap();
        let p_b = AngularDensity::from_values(shifted).unwrap();
        let ta = evolve(&p_a, 5.5, 1.0, 0.5, 1e-3, &[]).unwrap();
        let tb = evolve(&p_b, 5.5, 1.0, 0.5, 1e-3, &[]).unwrap();
        let va = ta.final_state().values();
        let vb = tb.final_state().values();
        for j in 0..m {
            assert_abs_diff_eq!(va[(j + shift) % m], vb[j], epsilon = 1e-10);
        }
    }

    #[test]
    fn input_validation() {
        assert!(AngularDensity::from_values(vec![1.0; 7]).is_err());
        assert!(AngularDensity::from_values(vec![-1.0; 8]).is_err());
        let p = AngularDensity::uniform(16).unwrap();
        assert!(mkv_rhs(&p, -1.0, 1.0).is_err());
        assert!(mkv_rhs(&p, 1.0, 0.0).is_err());
        assert!(evolve(&p, 1.0, 1.0, 1.0, 0.0, &[]).is_err());
        assert!(stationary_fixed_point(&p, 1.0, 0.0, 10).is_err());
    }
}
