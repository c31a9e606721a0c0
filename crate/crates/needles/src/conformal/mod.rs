//! Excluded-volume response matrix of a needle pair via conformal mapping.
//!
//! Two unit-speed Brownian needles with relative orientation θ̃ sweep an
//! excluded region that is a rhombus (side ε, angle θ̃). The collision
//! operator of the kinetic hierarchy needs the 2×2 matrix
//!
//! ```text
//! T(θ̃) = −∮ u(x̃) n̂(x̃) dS(x̃)   (n̂ into the rhombus, unit side ε = 1),
//! ```
//!
//! where `u = (u₁, u₂)` solves the exterior Neumann problem `Δu_i = 0`
//! outside the rhombus, `∂u_i/∂n = 0` on it, `u_i − x̃_i → 0` at infinity.
//! The solution is explicit through the Schwarz–Christoffel map `g` from the
//! unit disk (minus the origin) onto the rhombus exterior:
//!
//! ```text
//! W₁(ζ) = −(ā ζ + a/ζ),   W₂(ζ) = −i(ā ζ − a/ζ),   u_i = Re W_i ∘ g⁻¹,
//! T(θ̃) = 4 [ a₁²(π−θ̃) + a₂²θ̃      a₁a₂(π−2θ̃)        ]
//!          [ a₁a₂(π−2θ̃)            a₂²(π−θ̃) + a₁²θ̃  ],
//! ```
//!
//! with `a = a₁ + i a₂ = a(θ̃)` the map's scale constant. Both evaluation
//! paths for `a` live in submodules: [`quadrature`] (production: Gauss–Jacobi
//! on the side condition) and [`hyper`] (closed form, cross-check). The
//! matrix scales as ε²: `T_ε = ε² T`. [`oracle`] provides an independent
//! finite-difference evaluation and [`table`] a fast interpolant.
//!
//! Conventions: θ̃ ∈ [0, π]; `a₁ < 0 < a₂` on the open interval; at the
//! endpoints `T = diag(0, π)` (slit limit), at θ̃ = π/2 `T = μ I` with
//! μ = 2πa₂²·2 ≈ 2.188 (square).

pub mod hyper;
pub mod oracle;
pub mod quadrature;
pub mod table;

use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use oracle::{t_matrix_oracle, OracleResolution};
pub use table::{build_t_table, TTable};

/// Default tolerance for the quadrature path of the scale constant: the
/// order-doubling estimate must fall below this. Comfortably below the 1e−8
/// agreement level demanded of the two paths, far above f64 noise.
pub const SC_QUADRATURE_TOL: f64 = 1e-11;

/// Scale constant of the disk-exterior map for relative angle `theta`.
#[derive(Debug, Clone, Copy)]
pub struct SCConstant {
    /// Real part a₁ (negative on the open interval).
    pub a1: f64,
    /// Imaginary part a₂ (positive on the open interval).
    pub a2: f64,
    /// Relative orientation θ̃ ∈ [0, π] the constant belongs to.
    pub theta: f64,
}

impl SCConstant {
    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.a1, self.a2)
    }
}

/// Excluded-volume response matrix for unit side length, in the needle frame
/// (first axis along needle 1). Symmetric positive semi-definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TMatrix {
    pub t11: f64,
    pub t12: f64,
    pub t22: f64,
}

impl TMatrix {
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.t11, self.t12, self.t12, self.t22)
    }

    /// Eigenvalues (ascending) of the symmetric 2×2 matrix, in closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.t11 + self.t22);
        let disc = (0.5 * (self.t11 - self.t22)).hypot(self.t12);
        (mean - disc, mean + disc)
    }

    /// Assemble from a scale constant.
    pub fn from_constant(c: &SCConstant) -> TMatrix {
        let (a1, a2, tt) = (c.a1, c.a2, c.theta);
        TMatrix {
            t11: 4.0 * (a1 * a1 * (PI - tt) + a2 * a2 * tt),
            t12: 4.0 * a1 * a2 * (PI - 2.0 * tt),
            t22: 4.0 * (a2 * a2 * (PI - tt) + a1 * a1 * tt),
        }
    }
}

fn check_theta_closed(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) || !theta.is_finite() {
        return Err(Error::invalid(
            "theta",
            format!("relative angle must lie in [0, π], got {theta}"),
        ));
    }
    Ok(())
}

/// Closed-form scale constant (hypergeometric rearrangement); valid on the
/// closed interval [0, π], endpoints being the one-sided limits.
pub fn sc_constant(theta: f64) -> Result<SCConstant> {
    check_theta_closed(theta)?;
    let a = hyper::closed_form_a(theta);
    Ok(SCConstant {
        a1: a.re,
        a2: a.im,
        theta,
    })
}

/// Quadrature scale constant (production path): Gauss–Jacobi on the
/// side-condition chord with order-doubling error control at `tol`.
pub fn sc_constant_quadrature(theta: f64, tol: f64) -> Result<SCConstant> {
    check_theta_closed(theta)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("must be positive, got {tol}"),
        ));
    }
    let (a, _err) = quadrature::quadrature_a(theta, tol)?;
    Ok(SCConstant {
        a1: a.re,
        a2: a.im,
        theta,
    })
}

/// Response matrix for relative angle `theta` (open interval (0, π)), unit
/// side length. Production path: quadrature scale constant.
pub fn t_matrix(theta: f64) -> Result<TMatrix> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::invalid(
            "theta",
            format!("relative angle must lie in (0, π), got {theta}"),
        ));
    }
    let c = sc_constant_quadrature(theta, SC_QUADRATURE_TOL)?;
    Ok(TMatrix::from_constant(&c))
}

/// Lab-frame collision matrix `M(θ₁, θ̃) = R(θ₁) T(θ̃) R(θ₁)ᵀ` for a needle
/// at orientation θ₁ meeting one at θ₁ + θ̃ (unit side length).
pub fn m_matrix(theta1: f64, theta: f64) -> Result<Matrix2<f64>> {
    let t = t_matrix(theta)?;
    Ok(rotate_response(theta1, &t))
}

/// Rotate a needle-frame response matrix into the lab frame.
pub fn rotate_response(theta1: f64, t: &TMatrix) -> Matrix2<f64> {
    let (c, s) = (theta1.cos(), theta1.sin());
    let r = Matrix2::new(c, -s, s, c);
    r * t.matrix() * r.transpose()
}

/// Complex potentials of the two exterior flow solutions at a disk point ζ
/// (0 < |ζ| ≤ 1): `W₁ = −(ā ζ + a/ζ)`, `W₂ = −i(ā ζ − a/ζ)`. Their real
/// parts, composed with the inverse map, are the Neumann solutions `u₁, u₂`;
/// their imaginary parts (stream functions) vanish identically on |ζ| = 1.
pub fn w_solution(theta: f64, zeta: Complex64) -> Result<(Complex64, Complex64)> {
    check_theta_closed(theta)?;
    let r = zeta.norm();
    if !(r > 0.0 && r <= 1.0 + 1e-12) {
        return Err(Error::invalid(
            "zeta",
            format!("disk point must satisfy 0 < |ζ| ≤ 1, got |ζ| = {r}"),
        ));
    }
    let a = sc_constant_quadrature(theta, SC_QUADRATURE_TOL)?.as_complex();
    let w1 = -(a.conj() * zeta + a / zeta);
    let w2 = Complex64::new(0.0, -1.0) * (a.conj() * zeta - a / zeta);
    Ok((w1, w2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Adaptive-quadrature references at 40-digit precision (unit side).
    const T_REF: [(f64, [f64; 3]); 4] = [
        (
            PI / 4.0,
            [
                1.3056115053170736509,
                -0.71406264304808419459,
                2.7337367914132420401,
            ],
        ),
        (
            PI / 2.0,
            [2.1884396152264766388, 0.0, 2.1884396152264766388],
        ),
        (
            3.0 * PI / 4.0,
            [
                1.3056115053170736509,
                0.71406264304808419459,
                2.7337367914132420401,
            ],
        ),
        (
            0.001,
            [
                0.001001226446250421873,
                -0.0015704886620964405349,
                3.1419775036466202945,
            ],
        ),
    ];

    #[test]
    fn matrix_matches_references() {
        for (tt, [t11, t12, t22]) in T_REF {
            let t = t_matrix(tt).unwrap();
            assert_abs_diff_eq!(t.t11, t11, epsilon = 1e-10);
            assert_abs_diff_eq!(t.t12, t12, epsilon = 1e-10);
            assert_abs_diff_eq!(t.t22, t22, epsilon = 1e-10);
        }
    }

    #[test]
    fn square_case_is_isotropic_with_exact_zero_off_diagonal() {
        let t = t_matrix(PI / 2.0).unwrap();
        // π − 2·(π/2) is exactly 0.0 in f64, so the off-diagonal vanishes
        // exactly, not merely to rounding.
        assert_eq!(t.t12, 0.0);
        assert_relative_eq!(t.t11, t.t22, max_relative = 1e-14);
        assert_relative_eq!(t.t11, 2.1884396152264766, max_relative = 1e-12);
    }

    #[test]
    fn positive_definite_inside_interval() {
        for k in 1..32 {
            let tt = PI * k as f64 / 32.0;
            let t = t_matrix(tt).unwrap();
            let (lo, hi) = t.eigenvalues();
            // Degenerate (equal) eigenvalues are legitimate at θ̃ = π/2.
            assert!(lo > 0.0 && hi >= lo, "eigenvalues at θ̃={tt}: {lo}, {hi}");
        }
    }

    #[test]
    fn reflection_antisymmetry_of_off_diagonal() {
        for &tt in &[0.4, 1.0, 1.5] {
            let t = t_matrix(tt).unwrap();
            let tm = t_matrix(PI - tt).unwrap();
            assert_relative_eq!(t.t11, tm.t11, max_relative = 1e-10);
            assert_relative_eq!(t.t22, tm.t22, max_relative = 1e-10);
            assert_relative_eq!(t.t12, -tm.t12, max_relative = 1e-10);
        }
    }

    #[test]
    fn closed_form_and_quadrature_agree() {
        for k in 1..=20 {
            let tt = PI * k as f64 / 21.0;
            let c = sc_constant(tt).unwrap();
            let q = sc_constant_quadrature(tt, 1e-11).unwrap();
            assert_abs_diff_eq!(c.a1, q.a1, epsilon = 1e-12);
            assert_abs_diff_eq!(c.a2, q.a2, epsilon = 1e-12);
        }
    }

    #[test]
    fn lab_frame_rotation_covariance() {
        let tt = 1.1;
        let t0 = m_matrix(0.0, tt).unwrap();
        let t = t_matrix(tt).unwrap();
        assert_relative_eq!(t0[(0, 0)], t.t11, max_relative = 1e-14);
        // Rotating by π/2 swaps the diagonal and flips the off-diagonal.
        let t90 = m_matrix(PI / 2.0, tt).unwrap();
        assert_relative_eq!(t90[(0, 0)], t.t22, max_relative = 1e-12);
        assert_relative_eq!(t90[(1, 1)], t.t11, max_relative = 1e-12);
        assert_abs_diff_eq!(t90[(0, 1)], -t.t12, epsilon = 1e-12);
        // Trace is rotation invariant.
        for &th1 in &[0.3, 2.0, 5.5] {
            let m = m_matrix(th1, tt).unwrap();
            assert_relative_eq!(m[(0, 0)] + m[(1, 1)], t.t11 + t.t22, max_relative = 1e-12);
        }
    }

    #[test]
    fn stream_functions_vanish_on_disk_boundary() {
        for &tt in &[0.7, PI / 2.0, 2.6] {
            for k in 0..16 {
                let phi = 2.0 * PI * k as f64 / 16.0;
                let zeta = Complex64::from_polar(1.0, phi);
                let (w1, w2) = w_solution(tt, zeta).unwrap();
                assert_abs_diff_eq!(w1.im, 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(w2.im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn input_validation() {
        assert!(t_matrix(0.0).is_err());
        assert!(t_matrix(PI).is_err());
        assert!(t_matrix(-0.2).is_err());
        assert!(t_matrix(f64::NAN).is_err());
        assert!(sc_constant(3.5).is_err());
        assert!(w_solution(1.0, Complex64::new(0.0, 0.0)).is_err());
        assert!(w_solution(1.0, Complex64::new(2.0, 0.0)).is_err());
        // Endpoints are allowed for the constant itself (one-sided limits).
        assert!(sc_constant(0.0).is_ok());
        assert!(sc_constant(PI).is_ok());
        assert!(sc_constant_quadrature(0.0, 1e-10).is_ok());
    }
}
