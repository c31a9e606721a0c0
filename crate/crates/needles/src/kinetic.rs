//! The nonlocal kinetic equation for the one-needle phase density
//! `p(x, θ, t)` on `T² × [0, π)`:
//!
//! ```text
//! ∂_t p = ∇_ξ·{ D ∇_ξ p − f p + φ D ∫₀^π Q(θ₁, θ) dθ },   ξ = (x, θ₁),
//! ```
//!
//! with `D = diag(D_T, D_T, D_R)`, occupied fraction `φ = ε²(N−1)`, and the
//! pair-interaction kernel
//!
//! ```text
//! Q_T = sin θ · A + M(θ₁, θ) · B,      Q_R = sin θ · p ∂_θ p⁺,
//! A   = ½[∇ₓ(p p⁺) + (p p⁺/D_T)(f_T⁺ − f_T)],
//! B   = ½[p ∇ₓ p⁺ − p⁺ ∇ₓ p + (p p⁺/D_T)(f_T − f_T⁺)],
//! ```
//!
//! where `p⁺ = p(x, θ₁+θ)` and `M(θ₁, θ) = R_{θ₁} T(θ) R_{θ₁}ᵀ` rotates the
//! excluded-volume response matrix into the lab frame. Two identities shape
//! the discretization: `A + B = p ∇ₓ p⁺` (the drift contributions cancel),
//! and `∫₀^π sin θ ∂_θ p⁺ dθ = (W′ ∗ p)(θ₁)` — the angular collision integral
//! is exactly the mean-field alignment convolution, so it is evaluated with
//! the same spectral multipliers as the space-homogeneous module and the
//! x-homogeneous reduction holds to rounding rather than to quadrature error.
//!
//! Conventions: tensor grid `nx × ny × mθ`, row-major with the angular index
//! fastest (`index = (j·nx + i)·mθ + k`); θ derivatives spectral, x
//! derivatives second-order central in conservative flux form; semi-implicit
//! stepping (Crank–Nicolson for the full linear diffusion in Fourier space,
//! explicit for drift and collision fluxes).

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::conformal::{rotate_response, TTable};
use crate::error::{Error, Result};
use crate::geometry::Torus2;
use crate::homogeneous::AngularDensity;
use crate::hydro::SpatialDensity;
use crate::spectral::{neg_laplacian_symbol, signed_frequency, AngularTransform};

/// Abort threshold for negative excursions, relative to the global maximum.
const NEGATIVITY_ABORT: f64 = -1e-8;

/// Phase density on a periodic `nx × ny × mθ` grid, unit total mass
/// `∭ p dx dθ = 1` (rectangle rule, exact for periodic trapezoids).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDensity {
    nx: usize,
    ny: usize,
    mt: usize,
    torus: Torus2,
    values: Vec<f64>,
}

impl PhaseDensity {
    /// Wrap raw samples (layout `(j·nx + i)·mθ + k`): validates the shape
    /// (even mθ ≥ 8, nx, ny ≥ 4), finiteness and nonnegativity, then
    /// rescales to unit mass.
    pub fn from_values(
        nx: usize,
        ny: usize,
        mt: usize,
        torus: Torus2,
        values: Vec<f64>,
    ) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::invalid(
                "grid",
                format!("need at least 4×4 spatial nodes, got {nx}×{ny}"),
            ));
        }
        if mt < 8 || mt % 2 != 0 {
            return Err(Error::invalid(
                "grid",
                format!("need an even angular count ≥ 8, got {mt}"),
            ));
        }
        if values.len() != nx * ny * mt {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", nx * ny * mt, values.len()),
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
        let cell = torus.lx() / nx as f64 * (torus.ly() / ny as f64) * (PI / mt as f64);
        let mass: f64 = values.iter().sum::<f64>() * cell;
        if !(mass > 0.0) {
            return Err(Error::invalid("values", "zero total mass".to_string()));
        }
        let scale = 1.0 / mass;
        Ok(PhaseDensity {
            nx,
            ny,
            mt,
            torus,
            values: values.into_iter().map(|v| v * scale).collect(),
        })
    }

    /// Uniform density `1/(Lx·Ly·π)`.
    pub fn uniform(nx: usize, ny: usize, mt: usize, torus: Torus2) -> Result<Self> {
        Self::from_values(nx, ny, mt, torus, vec![1.0; nx * ny * mt])
    }

    /// Product density `ρ(x)·q(θ)` from spatial and angular marginals on
    /// matching grids.
    pub fn product(rho: &SpatialDensity, q: &AngularDensity) -> Result<Self> {
        let (nx, ny, mt) = (rho.nx(), rho.ny(), q.len());
        let mut values = Vec::with_capacity(nx * ny * mt);
        for node in 0..nx * ny {
            let r = rho.values()[node];
            for k in 0..mt {
                values.push(r * q.values()[k]);
            }
        }
        Self::from_values(nx, ny, mt, *rho.torus(), values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of angular nodes.
    pub fn m_theta(&self) -> usize {
        self.mt
    }

    pub fn torus(&self) -> &Torus2 {
        &self.torus
    }

    pub fn hx(&self) -> f64 {
        self.torus.lx() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.torus.ly() / self.ny as f64
    }

    pub fn h_theta(&self) -> f64 {
        PI / self.mt as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny && k < self.mt);
        (j * self.nx + i) * self.mt + k
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.hx() * self.hy() * self.h_theta()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::MAX, |a, &b| a.min(b))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::MIN, |a, &b| a.max(b))
    }

    /// Spatial marginal `ρ(x) = ∫₀^π p dθ`.
    pub fn x_marginal(&self) -> SpatialDensity {
        let ht = self.h_theta();
        let values: Vec<f64> = self
            .values
            .chunks_exact(self.mt)
            .map(|slice| slice.iter().sum::<f64>() * ht)
            .collect();
        SpatialDensity::from_values(self.nx, self.ny, self.torus, values)
            .expect("marginal of a valid density is valid")
    }

    /// Angular marginal `q(θ) = ∬ p dx`.
    pub fn theta_marginal(&self) -> AngularDensity {
        let mut q = vec![0.0; self.mt];
        for slice in self.values.chunks_exact(self.mt) {
            for (acc, &v) in q.iter_mut().zip(slice) {
                *acc += v;
            }
        }
        let cell = self.hx() * self.hy();
        for v in q.iter_mut() {
            *v *= cell;
        }
        AngularDensity::from_values(q).expect("marginal of a valid density is valid")
    }

    /// Nematic order field `S(x) = |∫ e^{2iθ} p dθ| / ρ(x)` (zero where the
    /// local density vanishes).
    pub fn nematic_field(&self) -> Vec<f64> {
        let ht = self.h_theta();
        self.values
            .chunks_exact(self.mt)
            .map(|slice| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut rho = 0.0;
                for (k, &v) in slice.iter().enumerate() {
                    let t = k as f64 * ht;
                    acc += v * Complex64::from_polar(1.0, 2.0 * t);
                    rho += v;
                }
                if rho > 0.0 {
                    acc.norm() / rho
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Fourier coefficient over the full grid:
    /// `p̂(kx, ky, n) = (1/(nx·ny·mθ)) Σ p e^{−2πi(kx i/nx + ky j/ny)} e^{−2inθ}`.
    pub fn mode_amplitude(&self, kx: i64, ky: i64, n: i64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..self.ny {
            for i in 0..self.nx {
                for k in 0..self.mt {
                    let phase = -2.0
                        * PI
                        * (kx as f64 * i as f64 / self.nx as f64
                            + ky as f64 * j as f64 / self.ny as f64)
                        - 2.0 * n as f64 * (k as f64 * PI / self.mt as f64);
                    acc += self.values[self.index(i, j, k)] * Complex64::from_polar(1.0, phase);
                }
            }
        }
        acc / (self.nx * self.ny * self.mt) as f64
    }
}

/// Precomputed interaction geometry per `(θ₁, θ)` node pair: the `sin θ`
/// weight and the rotated response matrix `M(θ₁, θ) = R_{θ₁} T(θ) R_{θ₁}ᵀ`
/// (symmetric; stored as the three distinct entries, index `a·mθ + k`).
#[derive(Debug, Clone)]
pub struct KernelSlices {
    mt: usize,
    sin_theta: Vec<f64>,
    m11: Vec<f64>,
    m12: Vec<f64>,
    m22: Vec<f64>,
}

impl KernelSlices {
    pub fn build(mt: usize, table: &TTable) -> Result<Self> {
        if mt < 8 || mt % 2 != 0 {
            return Err(Error::invalid(
                "grid",
                format!("need an even angular count ≥ 8, got {mt}"),
            ));
        }
        let ht = PI / mt as f64;
        let sin_theta: Vec<f64> = (0..mt).map(|k| (k as f64 * ht).sin()).collect();
        let mut m11 = vec![0.0; mt * mt];
        let mut m12 = vec![0.0; mt * mt];
        let mut m22 = vec![0.0; mt * mt];
        for k in 0..mt {
            let t = table.eval(k as f64 * ht)?;
            for a in 0..mt {
                let m = rotate_response(a as f64 * ht, &t);
                m11[a * mt + k] = m[(0, 0)];
                m12[a * mt + k] = m[(0, 1)];
                m22[a * mt + k] = m[(1, 1)];
            }
        }
        Ok(KernelSlices {
            mt,
            sin_theta,
            m11,
            m12,
            m22,
        })
    }

    pub fn m_theta(&self) -> usize {
        self.mt
    }
}

/// Physical parameters and precomputed kernels for the kinetic equation.
/// Drift tables, when present, live on the same `(x, θ)` grid as the density
/// (layout `(j·nx + i)·mθ + k`) and are π-periodic in θ.
#[derive(Debug, Clone)]
pub struct KineticParams {
    pub d_t: f64,
    pub d_r: f64,
    pub phi: f64,
    slices: KernelSlices,
    f_t: Option<(Vec<f64>, Vec<f64>)>,
    f_r: Option<Vec<f64>>,
}

impl KineticParams {
    pub fn new(d_t: f64, d_r: f64, phi: f64, table: &TTable, mt: usize) -> Result<Self> {
        if !(d_t > 0.0 && d_t.is_finite()) {
            return Err(Error::invalid(
                "D_T",
                format!("must be positive, got {d_t}"),
            ));
        }
        if !(d_r > 0.0 && d_r.is_finite()) {
            return Err(Error::invalid(
                "D_R",
                format!("must be positive, got {d_r}"),
            ));
        }
        if !(phi >= 0.0 && phi.is_finite()) {
            return Err(Error::invalid("phi", format!("must be ≥ 0, got {phi}")));
        }
        Ok(KineticParams {
            d_t,
            d_r,
            phi,
            slices: KernelSlices::build(mt, table)?,
            f_t: None,
            f_r: None,
        })
    }

    /// Attach a translational drift table `f_T(x, θ)` (two components).
    pub fn with_translational_drift(mut self, fx: Vec<f64>, fy: Vec<f64>) -> Self {
        self.f_t = Some((fx, fy));
        self
    }

    /// Attach a rotational drift table `f_R(x, θ)`.
    pub fn with_rotational_drift(mut self, fr: Vec<f64>) -> Self {
        self.f_r = Some(fr);
        self
    }

    pub fn slices(&self) -> &KernelSlices {
        &self.slices
    }

    fn check_grids(&self, p: &PhaseDensity) -> Result<()> {
        if self.slices.mt != p.mt {
            return Err(Error::invalid(
                "grid",
                format!(
                    "kernel slices built for mθ = {}, density has {}",
                    self.slices.mt, p.mt
                ),
            ));
        }
        let n = p.values.len();
        if let Some((fx, fy)) = &self.f_t {
            if fx.len() != n || fy.len() != n {
                return Err(Error::invalid(
                    "drift",
                    format!("translational drift tables must have {n} samples"),
                ));
            }
        }
        if let Some(fr) = &self.f_r {
            if fr.len() != n {
                return Err(Error::invalid(
                    "drift",
                    format!("rotational drift table must have {n} samples"),
                ));
            }
        }
        Ok(())
    }
}

/// The pair-interaction vectors at one `(x, θ₁, θ)` triple, from θ-slices of
/// `p`, its spatial gradient, and (optionally) the translational drift at
/// that spatial node: `A = ½[∇(pp⁺) + (pp⁺/D_T)(f_T⁺−f_T)]`,
/// `B = ½[p∇p⁺ − p⁺∇p + (pp⁺/D_T)(f_T−f_T⁺)]`. Their sum telescopes to
/// `p ∇p⁺`: the drift contributions cancel identically.
#[allow(clippy::too_many_arguments)]
pub fn kernel_ab(
    p: &[f64],
    gx: &[f64],
    gy: &[f64],
    f_t: Option<(&[f64], &[f64])>,
    d_t: f64,
    theta1: usize,
    theta: usize,
) -> ([f64; 2], [f64; 2]) {
    let mt = p.len();
    let a = theta1 % mt;
    let b = (theta1 + theta) % mt;
    let (pa, pb) = (p[a], p[b]);
    let sym_x = 0.5 * (pa * gx[b] + pb * gx[a]);
    let sym_y = 0.5 * (pa * gy[b] + pb * gy[a]);
    let asym_x = 0.5 * (pa * gx[b] - pb * gx[a]);
    let asym_y = 0.5 * (pa * gy[b] - pb * gy[a]);
    match f_t {
        None => ([sym_x, sym_y], [asym_x, asym_y]),
        Some((fx, fy)) => {
            let w = 0.5 * pa * pb / d_t;
            let dfx = fx[b] - fx[a];
            let dfy = fy[b] - fy[a];
            (
                [sym_x + w * dfx, sym_y + w * dfy],
                [asym_x - w * dfx, asym_y - w * dfy],
            )
        }
    }
}

/// Integrated collision fluxes `φ ∫₀^π Q dθ` per grid node: the spatial
/// 2-vector (from `Q_T`, trapezoid in θ — the integrand vanishes at both
/// endpoints) and the angular scalar (from `Q_R`, evaluated exactly as
/// `p·(W′∗p)` through the spectral convolution).
#[derive(Debug, Clone)]
pub struct CollisionFlux {
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
    pub q_theta: Vec<f64>,
}

pub fn collision_flux(p: &PhaseDensity, params: &KineticParams) -> Result<CollisionFlux> {
    params.check_grids(p)?;
    let n = p.values.len();
    let mut out = CollisionFlux {
        qx: vec![0.0; n],
        qy: vec![0.0; n],
        q_theta: vec![0.0; n],
    };
    if params.phi == 0.0 {
        return Ok(out);
    }
    let (gx, gy) = spatial_gradients(p);
    let (nx, ny, mt) = (p.nx, p.ny, p.mt);
    let ht = p.h_theta();
    let phi = params.phi;
    let slices = &params.slices;
    let tr = AngularTransform::new(mt);

    for node in 0..nx * ny {
        let base = node * mt;
        let ps = &p.values[base..base + mt];
        let gxs = &gx[base..base + mt];
        let gys = &gy[base..base + mt];
        let fts = params
            .f_t
            .as_ref()
            .map(|(fx, fy)| (&fx[base..base + mt], &fy[base..base + mt]));

        // Angular part: φ p (W′∗p) at this spatial node.
        let conv = tr.convolve_wprime(ps);
        for k in 0..mt {
            out.q_theta[base + k] = phi * ps[k] * conv[k];
        }

        // Spatial part: trapezoid over θ of sinθ·A + M(θ₁,θ)·B.
        for a in 0..mt {
            let mut acc_x = 0.0;
            let mut acc_y = 0.0;
            let row = a * mt;
            for k in 0..mt {
                let (av, bv) = kernel_ab(ps, gxs, gys, fts, params.d_t, a, k);
                let s = slices.sin_theta[k];
                acc_x += s * av[0] + slices.m11[row + k] * bv[0] + slices.m12[row + k] * bv[1];
                acc_y += s * av[1] + slices.m12[row + k] * bv[0] + slices.m22[row + k] * bv[1];
            }
            out.qx[base + a] = phi * ht * acc_x;
            out.qy[base + a] = phi * ht * acc_y;
        }
    }
    Ok(out)
}

/// Central-difference spatial gradients of `p`, per grid node.
fn spatial_gradients(p: &PhaseDensity) -> (Vec<f64>, Vec<f64>) {
    let (nx, ny, mt) = (p.nx, p.ny, p.mt);
    let (tx, ty) = (0.5 / p.hx(), 0.5 / p.hy());
    let mut gx = vec![0.0; p.values.len()];
    let mut gy = vec![0.0; p.values.len()];
    for j in 0..ny {
        for i in 0..nx {
            let node = j * nx + i;
            let e = (j * nx + (i + 1) % nx) * mt;
            let w = (j * nx + (i + nx - 1) % nx) * mt;
            let n_ = (((j + 1) % ny) * nx + i) * mt;
            let s = (((j + ny - 1) % ny) * nx + i) * mt;
            let base = node * mt;
            for k in 0..mt {
                gx[base + k] = (p.values[e + k] - p.values[w + k]) * tx;
                gy[base + k] = (p.values[n_ + k] - p.values[s + k]) * ty;
            }
        }
    }
    (gx, gy)
}

/// Full right-hand side `∇_ξ·{D∇_ξp − fp + φD∫Q dθ}` in conservative form:
/// x-fluxes live on faces (diffusion face-natural, drift and collision
/// face-averaged), θ-fluxes are differentiated spectrally. The discrete
/// mass derivative is zero to rounding by construction.
pub fn rhs(p: &PhaseDensity, params: &KineticParams) -> Result<Vec<f64>> {
    let coll = collision_flux(p, params)?;
    Ok(assemble_divergence(p, params, &coll, true))
}

/// Divergence assembly; with `include_diffusion = false` it yields only the
/// explicit (drift + collision) part used by the semi-implicit stepper.
fn assemble_divergence(
    p: &PhaseDensity,
    params: &KineticParams,
    coll: &CollisionFlux,
    include_diffusion: bool,
) -> Vec<f64> {
    let (nx, ny, mt) = (p.nx, p.ny, p.mt);
    let n = p.values.len();
    let (hx, hy) = (p.hx(), p.hy());
    let (d_t, d_r) = (params.d_t, params.d_r);
    let v = &p.values;

    // Node values of the non-diffusive spatial flux G = −f_T p + D_T·q.
    let mut gx_node = vec![0.0; n];
    let mut gy_node = vec![0.0; n];
    for idx in 0..n {
        gx_node[idx] = d_t * coll.qx[idx];
        gy_node[idx] = d_t * coll.qy[idx];
    }
    if let Some((fx, fy)) = &params.f_t {
        for idx in 0..n {
            gx_node[idx] -= fx[idx] * v[idx];
            gy_node[idx] -= fy[idx] * v[idx];
        }
    }

    // Face fluxes and their divergence.
    let mut east = vec![0.0; n];
    let mut north = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let base = (j * nx + i) * mt;
            let e = (j * nx + (i + 1) % nx) * mt;
            let nn = (((j + 1) % ny) * nx + i) * mt;
            for k in 0..mt {
                let mut fe = 0.5 * (gx_node[base + k] + gx_node[e + k]);
                let mut fn_ = 0.5 * (gy_node[base + k] + gy_node[nn + k]);
                if include_diffusion {
                    fe += d_t * (v[e + k] - v[base + k]) / hx;
                    fn_ += d_t * (v[nn + k] - v[base + k]) / hy;
                }
                east[base + k] = fe;
                north[base + k] = fn_;
            }
        }
    }
    let mut out = vec![0.0; n];
    for j in 0..ny {
        for i in 0..nx {
            let base = (j * nx + i) * mt;
            let w = (j * nx + (i + nx - 1) % nx) * mt;
            let s = (((j + ny - 1) % ny) * nx + i) * mt;
            for k in 0..mt {
                out[base + k] =
                    (east[base + k] - east[w + k]) / hx + (north[base + k] - north[s + k]) / hy;
            }
        }
    }

    // Angular direction: ∂_θ(D_R ∂_θ p − f_R p + D_R q_θ), spectrally.
    let tr = AngularTransform::new(mt);
    let mut gtheta = vec![0.0; mt];
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); mt];
    for node in 0..nx * ny {
        let base = node * mt;
        for k in 0..mt {
            let mut g = d_r * coll.q_theta[base + k];
            if let Some(fr) = &params.f_r {
                g -= fr[base + k] * v[base + k];
            }
            gtheta[k] = g;
        }
        for (k, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(gtheta[k], 0.0);
        }
        tr.forward_inplace(&mut buf);
        for k in 0..mt {
            let nfreq = signed_frequency(k, mt);
            buf[k] *= Complex64::new(0.0, 2.0 * nfreq as f64);
        }
        let dvals = tr.values(&buf);
        for k in 0..mt {
            out[base + k] += dvals[k];
        }
        if include_diffusion {
            let lap = tr.apply_multiplier(&v[base..base + mt], |nf| {
                Complex64::new(-4.0 * (nf * nf) as f64, 0.0)
            });
            for k in 0..mt {
                out[base + k] += d_r * lap[k];
            }
        }
    }
    out
}

/// Default semi-implicit step: `0.5·min(h²/(4 D_T), 0.1/D_R)`.
pub fn default_dt(p: &PhaseDensity, params: &KineticParams) -> f64 {
    let h = p.hx().min(p.hy());
    0.5 * (h * h / (4.0 * params.d_t)).min(0.1 / params.d_r)
}

/// Evolution record of the phase density.
#[derive(Debug, Clone)]
pub struct KineticTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseDensity>,
}

impl KineticTrajectory {
    pub fn final_state(&self) -> &PhaseDensity {
        self.states.last().expect("trajectory never empty")
    }
}

/// Semi-implicit evolution to `t_end`: the full linear diffusion
/// `D_T Δₓ + D_R ∂²_θ` is treated with Crank–Nicolson through its discrete
/// Fourier symbols (the five-point symbol in x, the exact `−4n²` in θ);
/// drift and collision fluxes are explicit. Mass is conserved to rounding;
/// negative excursions beyond `−1e−8·max(p)` abort with diagnostics.
pub fn evolve(
    p0: &PhaseDensity,
    params: &KineticParams,
    t_end: f64,
    dt: Option<f64>,
    record_times: &[f64],
) -> Result<KineticTrajectory> {
    params.check_grids(p0)?;
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end", format!("must be ≥ 0, got {t_end}")));
    }
    let dt = match dt {
        Some(d) if !(d > 0.0) => {
            return Err(Error::invalid("dt", format!("must be positive, got {d}")))
        }
        Some(d) => d,
        None => default_dt(p0, params),
    };
    let (nx, ny, mt) = (p0.nx, p0.ny, p0.mt);
    let n = p0.values.len();
    let fft = Fft3::new(nx, ny, mt);

    // Crank–Nicolson factors per Fourier mode.
    let mut symbol = vec![0.0; n];
    for ky in 0..ny {
        let ly = neg_laplacian_symbol(ky, ny, p0.hy());
        for kx in 0..nx {
            let lx = neg_laplacian_symbol(kx, nx, p0.hx());
            for k in 0..mt {
                let nf = signed_frequency(k, mt);
                symbol[(ky * nx + kx) * mt + k] =
                    params.d_t * (lx + ly) + params.d_r * 4.0 * (nf * nf) as f64;
            }
        }
    }

    let mut targets: Vec<f64> = record_times
        .iter()
        .copied()
        .filter(|&t| (0.0..=t_end).contains(&t))
        .collect();
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut state = p0.clone();
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut next_target = 0usize;
    while next_target < targets.len() && targets[next_target] <= 0.0 {
        times.push(0.0);
        states.push(p0.clone());
        next_target += 1;
    }

    let mut phat: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    let mut ehat: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    while t < t_end - 1e-15 * t_end.max(1.0) {
        let boundary = if next_target < targets.len() {
            targets[next_target].min(t_end)
        } else {
            t_end
        };
        let h = dt.min(boundary - t).max(1e-300);

        let coll = collision_flux(&state, params)?;
        let explicit = assemble_divergence(&state, params, &coll, false);
        for idx in 0..n {
            phat[idx] = Complex64::new(state.values[idx], 0.0);
            ehat[idx] = Complex64::new(explicit[idx], 0.0);
        }
        fft.forward(&mut phat);
        fft.forward(&mut ehat);
        for idx in 0..n {
            let z = 0.5 * h * symbol[idx];
            phat[idx] = ((1.0 - z) * phat[idx] + h * ehat[idx]) / (1.0 + z);
        }
        fft.inverse(&mut phat);
        for idx in 0..n {
            state.values[idx] = phat[idx].re;
        }

        let max = state.max_value();
        if !max.is_finite() {
            return Err(Error::Instability {
                what: "kinetic evolution",
                detail: format!("non-finite density at t = {t}"),
            });
        }
        if state.min_value() < NEGATIVITY_ABORT * max.max(1.0) {
            return Err(Error::Instability {
                what: "kinetic evolution",
                detail: format!(
                    "negative excursion beyond {NEGATIVITY_ABORT:+e}·max at t = {t} \
                     (min {:+e}, max {:+e}); reduce dt or the density contrast",
                    state.min_value(),
                    max
                ),
            });
        }
        t += h;
        while next_target < targets.len() && t >= targets[next_target] - 1e-12 {
            times.push(t);
            states.push(state.clone());
            next_target += 1;
        }
    }
    if times.last().map_or(true, |&lt| lt < t_end - 1e-12) {
        times.push(t_end.min(t));
        states.push(state);
    }
    Ok(KineticTrajectory { times, states })
}

/// Three-dimensional DFT on the `(x, y, θ)` tensor grid (θ fastest).
struct Fft3 {
    nx: usize,
    ny: usize,
    mt: usize,
    fwd_x: Arc<dyn rustfft::Fft<f64>>,
    inv_x: Arc<dyn rustfft::Fft<f64>>,
    fwd_y: Arc<dyn rustfft::Fft<f64>>,
    inv_y: Arc<dyn rustfft::Fft<f64>>,
    fwd_t: Arc<dyn rustfft::Fft<f64>>,
    inv_t: Arc<dyn rustfft::Fft<f64>>,
}

impl Fft3 {
    fn new(nx: usize, ny: usize, mt: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            nx,
            ny,
            mt,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            fwd_t: planner.plan_fft_forward(mt),
            inv_t: planner.plan_fft_inverse(mt),
        }
    }

    fn apply(&self, data: &mut [Complex64], inverse: bool) {
        let (nx, ny, mt) = (self.nx, self.ny, self.mt);
        let (fx, fy, ft) = if inverse {
            (&self.inv_x, &self.inv_y, &self.inv_t)
        } else {
            (&self.fwd_x, &self.fwd_y, &self.fwd_t)
        };
        // θ lines are contiguous.
        for chunk in data.chunks_exact_mut(mt) {
            ft.process(chunk);
        }
        // x lines: stride mt.
        let mut line = vec![Complex64::new(0.0, 0.0); nx];
        for j in 0..ny {
            for k in 0..mt {
                for i in 0..nx {
                    line[i] = data[(j * nx + i) * mt + k];
                }
                fx.process(&mut line);
                for i in 0..nx {
                    data[(j * nx + i) * mt + k] = line[i];
                }
            }
        }
        // y lines: stride nx·mt.
        let mut line = vec![Complex64::new(0.0, 0.0); ny];
        for i in 0..nx {
            for k in 0..mt {
                for j in 0..ny {
                    line[j] = data[(j * nx + i) * mt + k];
                }
                fy.process(&mut line);
                for j in 0..ny {
                    data[(j * nx + i) * mt + k] = line[j];
                }
            }
        }
        if inverse {
            let scale = 1.0 / (nx * ny * mt) as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, false);
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, true);
    }
}
