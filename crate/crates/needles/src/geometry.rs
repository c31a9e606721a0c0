//! Exact needle geometry on a periodic box.
//!
//! A needle is the closed segment of length `eps` centred at `x` with
//! orientation `theta ∈ [0, π)` (a needle and its reversal are the same
//! object, so orientations live on a half-circle). This module provides:
//!
//! * endpoints and minimum-image overlap predicates between needles,
//! * the *excluded rhombus*: at fixed relative angle `θ̃`, the set of second
//!   centres that would overlap a given needle is a rhombus of area
//!   `eps² sin θ̃`; its vertices are produced in the first needle's frame,
//! * a replicated-image brute-force overlap oracle used to validate the
//!   minimum-image shortcut.
//!
//! Conventions: all predicates are pure; angles are reduced to `[0, π)` at
//! construction and never inside predicates; grazing contact (within a small
//! configurable tolerance) counts as overlap, which is the conservative choice
//! for hard-core rejection sampling.

use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Relative tolerance (in units of `eps`) below which a near-touch between
/// segments is treated as contact. Conservative: grazing counts as overlap.
pub const DEFAULT_GRAZE_TOL: f64 = 1e-12;

/// Periodic box (2-torus) with periods `lx`, `ly`.
///
/// Minimum-image displacement components lie in `[−L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus2 {
    lx: f64,
    ly: f64,
}

impl Torus2 {
    /// Box with the given periods. Errors if either is non-positive or non-finite.
    pub fn new(lx: f64, ly: f64) -> Result<Self> {
        if !(lx > 0.0 && lx.is_finite()) {
            return Err(Error::invalid("Lx", format!("must be positive, got {lx}")));
        }
        if !(ly > 0.0 && ly.is_finite()) {
            return Err(Error::invalid("Ly", format!("must be positive, got {ly}")));
        }
        Ok(Torus2 { lx, ly })
    }

    /// Square box of period `l`.
    pub fn square(l: f64) -> Result<Self> {
        Self::new(l, l)
    }

    /// Box period in x.
    pub fn lx(&self) -> f64 {
        self.lx
    }

    /// Box period in y.
    pub fn ly(&self) -> f64 {
        self.ly
    }

    /// Wrap a point into the fundamental cell `[0, Lx) × [0, Ly)`.
    pub fn wrap(&self, p: Vector2<f64>) -> Vector2<f64> {
        Vector2::new(p.x.rem_euclid(self.lx), p.y.rem_euclid(self.ly))
    }

    /// Minimum-image displacement `to − from`, components in `[−L/2, L/2)`.
    pub fn min_image(&self, from: Vector2<f64>, to: Vector2<f64>) -> Vector2<f64> {
        let wrap_c = |d: f64, l: f64| {
            let r = (d + 0.5 * l).rem_euclid(l) - 0.5 * l;
            // rem_euclid may return exactly l for tiny negative inputs; renormalize.
            if r >= 0.5 * l {
                r - l
            } else {
                r
            }
        };
        Vector2::new(
            wrap_c(to.x - from.x, self.lx),
            wrap_c(to.y - from.y, self.ly),
        )
    }
}

/// One needle's microstate: centre, orientation, and length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeedleConfig {
    /// Centre position (torus coordinates; not necessarily wrapped).
    pub x: Vector2<f64>,
    /// Orientation, reduced to `[0, π)` at construction.
    pub theta: f64,
    /// Needle length (strictly positive).
    pub eps: f64,
}

impl NeedleConfig {
    /// New needle with `theta` reduced mod π. Errors on a non-positive length
    /// or a length that would span half the box (the minimum-image shortcut
    /// in [`needles_overlap`] requires `eps < min(Lx, Ly)/2`).
    pub fn new(x: Vector2<f64>, theta: f64, eps: f64, dom: &Torus2) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid(
                "eps",
                format!("must be positive, got {eps}"),
            ));
        }
        if eps >= 0.5 * dom.lx().min(dom.ly()) {
            return Err(Error::invalid(
                "eps",
                format!(
                    "needle length {eps} must be below half the box period {}",
                    dom.lx().min(dom.ly())
                ),
            ));
        }
        if !theta.is_finite() {
            return Err(Error::invalid("theta", "must be finite".to_string()));
        }
        Ok(NeedleConfig {
            x,
            theta: reduce_angle(theta),
            eps,
        })
    }
}

/// Reduce an angle to `[0, π)`.
pub fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(std::f64::consts::PI);
    // rem_euclid can return exactly π when theta is a tiny negative number.
    if r >= std::f64::consts::PI {
        0.0
    } else {
        r
    }
}

/// Endpoints `x ± (eps/2)(cos θ, sin θ)`, not torus-wrapped (callers wrap).
pub fn needle_endpoints(c: &NeedleConfig) -> (Vector2<f64>, Vector2<f64>) {
    let half = 0.5 * c.eps * Vector2::new(c.theta.cos(), c.theta.sin());
    (c.x - half, c.x + half)
}

/// Signed twice-area of the triangle `(a, b, c)`; positive when `c` lies left
/// of the directed line `a → b`.
fn orient(a: Vector2<f64>, b: Vector2<f64>, c: Vector2<f64>) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Whether `p` lies within `tol` of the axis-aligned bounding box of `[a, b]`.
fn in_bbox(p: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>, tol: f64) -> bool {
    p.x >= a.x.min(b.x) - tol
        && p.x <= a.x.max(b.x) + tol
        && p.y >= a.y.min(b.y) - tol
        && p.y <= a.y.max(b.y) + tol
}

/// Closed-segment intersection test with a grazing tolerance `tol` (a length;
/// contacts closer than `tol` count as intersection).
pub fn segments_intersect(
    p1: Vector2<f64>,
    q1: Vector2<f64>,
    p2: Vector2<f64>,
    q2: Vector2<f64>,
    tol: f64,
) -> bool {
    let len1 = (q1 - p1).norm();
    let len2 = (q2 - p2).norm();
    // orient() has units length²; |orient|/len is the point-line distance.
    let z1 = tol * len1.max(tol);
    let z2 = tol * len2.max(tol);
    let snap = |v: f64, z: f64| if v.abs() <= z { 0.0 } else { v };
    let o1 = snap(orient(p1, q1, p2), z1);
    let o2 = snap(orient(p1, q1, q2), z1);
    let o3 = snap(orient(p2, q2, p1), z2);
    let o4 = snap(orient(p2, q2, q1), z2);

    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true; // proper crossing
    }
    // Collinear or endpoint-touching cases (any snapped orientation is zero).
    (o1 == 0.0 && in_bbox(p2, p1, q1, tol))
        || (o2 == 0.0 && in_bbox(q2, p1, q1, tol))
        || (o3 == 0.0 && in_bbox(p1, p2, q2, tol))
        || (o4 == 0.0 && in_bbox(q1, p2, q2, tol))
}

/// Whether two needles overlap under the minimum-image convention.
///
/// Symmetric in its arguments. Both needles must share the same length (the
/// excluded-rhombus picture assumes this); this is debug-asserted.
///
/// Requires `eps < min(Lx, Ly)/2` (enforced at [`NeedleConfig::new`]): then a
/// pair can only touch through the nearest image of the centre difference.
pub fn needles_overlap(c1: &NeedleConfig, c2: &NeedleConfig, dom: &Torus2) -> bool {
    debug_assert!(
        (c1.eps - c2.eps).abs() <= f64::EPSILON * c1.eps.max(c2.eps),
        "overlap predicate assumes a common needle length"
    );
    let d = dom.min_image(c1.x, c2.x);
    let c2_near = NeedleConfig { x: c1.x + d, ..*c2 };
    let (p1, q1) = needle_endpoints(c1);
    let (p2, q2) = needle_endpoints(&c2_near);
    segments_intersect(p1, q1, p2, q2, DEFAULT_GRAZE_TOL * c1.eps)
}

/// Brute-force overlap oracle testing all 9 periodic images of the second
/// needle, with no minimum-image shortcut. Used to validate [`needles_overlap`].
pub fn needles_overlap_images(c1: &NeedleConfig, c2: &NeedleConfig, dom: &Torus2) -> bool {
    let (p1, q1) = needle_endpoints(c1);
    let base = dom.wrap(c2.x) + (dom.wrap(c1.x) - c1.x); // same cell as c1's representative
    for ix in -1..=1 {
        for iy in -1..=1 {
            let shift = Vector2::new(ix as f64 * dom.lx(), iy as f64 * dom.ly());
            let c2_img = NeedleConfig {
                x: base + shift,
                ..*c2
            };
            let (p2, q2) = needle_endpoints(&c2_img);
            if segments_intersect(p1, q1, p2, q2, DEFAULT_GRAZE_TOL * c1.eps) {
                return true;
            }
        }
    }
    false
}

/// The excluded rhombus: second-needle centres (at relative angle `θ̃`) that
/// would overlap a reference needle.
///
/// Vertices are listed in order `A, B, C, D`; for `θ̃ ∈ (0, π)` this traversal
/// is clockwise and the enclosed area is `eps² sin θ̃`. At `θ̃ ∈ {0, π}` the
/// rhombus collapses to a segment of length `2·eps` and is flagged
/// [`Rhombus::degenerate`] (collinear needles still exclude a line of centres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rhombus {
    /// Vertices `[A, B, C, D]` in absolute coordinates (not torus-wrapped).
    pub vertices: [Vector2<f64>; 4],
    /// True when the relative angle was 0 mod π (zero-area segment).
    pub degenerate: bool,
}

/// Excluded rhombus for a reference needle `c1` and relative angle
/// `theta_rel = θ₂ − θ₁` (any real; reduced mod π, under which the excluded
/// set is invariant because a needle equals its reversal).
pub fn excluded_rhombus(c1: &NeedleConfig, theta_rel: f64) -> Rhombus {
    let tt = reduce_angle(theta_rel);
    let (ct, st) = (tt.cos(), tt.sin());
    let (c1c, c1s) = (c1.theta.cos(), c1.theta.sin());
    let rot = |v: Vector2<f64>| Vector2::new(c1c * v.x - c1s * v.y, c1s * v.x + c1c * v.y);
    let h = 0.5 * c1.eps;
    let local = [
        Vector2::new(-1.0 + ct, st),  // A
        Vector2::new(1.0 + ct, st),   // B
        Vector2::new(1.0 - ct, -st),  // C
        Vector2::new(-1.0 - ct, -st), // D
    ];
    Rhombus {
        vertices: local.map(|v| c1.x + h * rot(v)),
        degenerate: st == 0.0,
    }
}

impl Rhombus {
    /// Shoelace area (nonnegative; zero for the degenerate segment).
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let mut twice = 0.0;
        for k in 0..4 {
            let a = v[k];
            let b = v[(k + 1) % 4];
            twice += a.x * b.y - a.y * b.x;
        }
        0.5 * twice.abs()
    }

    /// Whether `p` lies in the closed rhombus, with a grazing tolerance `tol`
    /// (a length; points within `tol` of the boundary count as inside).
    ///
    /// For the degenerate segment this tests containment in the segment
    /// thickened by `tol`.
    pub fn contains(&self, p: Vector2<f64>, tol: f64) -> bool {
        let v = &self.vertices;
        if self.degenerate {
            // Segment B–D (A=C=centre line ends coincide pairwise at θ̃=0).
            let (a, b) = (v[3], v[1]);
            let len = (b - a).norm();
            if len == 0.0 {
                return (p - a).norm() <= tol;
            }
            let dist = orient(a, b, p).abs() / len;
            return dist <= tol && in_bbox(p, a, b, tol);
        }
        // A→B→C→D is clockwise: interior points see every edge cross ≤ 0.
        for k in 0..4 {
            let a = v[k];
            let b = v[(k + 1) % 4];
            let len = (b - a).norm();
            if orient(a, b, p) > tol * len {
                return false;
            }
        }
        true
    }
}

/// Nonnegative area of a rhombus (shoelace); equals `eps² sin θ̃` for
/// [`excluded_rhombus`] outputs.
pub fn rhombus_area(r: &Rhombus) -> f64 {
    r.area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn dom() -> Torus2 {
        Torus2::square(PI).unwrap()
    }

    fn needle(x: f64, y: f64, theta: f64, eps: f64) -> NeedleConfig {
        NeedleConfig::new(Vector2::new(x, y), theta, eps, &dom()).unwrap()
    }

    #[test]
    fn endpoints_axis_aligned() {
        let (a, b) = needle_endpoints(&needle(0.0, 0.0, 0.0, 1.0));
        assert_relative_eq!(a.x, -0.5);
        assert_relative_eq!(a.y, 0.0);
        assert_relative_eq!(b.x, 0.5);
        assert_relative_eq!(b.y, 0.0);
    }

    #[test]
    fn endpoints_vertical() {
        let (a, b) = needle_endpoints(&needle(0.0, 0.0, FRAC_PI_2, 1.0));
        assert_relative_eq!(a.y, -0.5, max_relative = 1e-15);
        assert_relative_eq!(b.y, 0.5, max_relative = 1e-15);
        assert!(a.x.abs() < 1e-16 && b.x.abs() < 1e-16);
    }

    #[test]
    fn endpoints_diagonal() {
        let (a, b) = needle_endpoints(&needle(0.0, 0.0, FRAC_PI_4, 1.0));
        let s = 2.0_f64.sqrt() / 4.0;
        assert_relative_eq!(b.x, s, max_relative = 1e-15);
        assert_relative_eq!(b.y, s, max_relative = 1e-15);
        assert_relative_eq!(a.x, -s, max_relative = 1e-15);
        assert_relative_eq!(a.y, -s, max_relative = 1e-15);
    }

    #[test]
    fn collinear_overlap() {
        let c1 = needle(0.0, 0.0, 0.0, 1.0);
        let c2 = needle(0.5, 0.0, 0.0, 1.0);
        assert!(needles_overlap(&c1, &c2, &dom()));
    }

    #[test]
    fn distant_perpendicular_needles_do_not_overlap() {
        let eps = 0.5;
        let c1 = needle(0.0, 0.0, 0.0, eps);
        let c2 = needle(2.0 * eps, 0.0, FRAC_PI_2, eps);
        assert!(!needles_overlap(&c1, &c2, &dom()));
    }

    #[test]
    fn crossing_needles_overlap() {
        let c1 = needle(1.0, 1.0, 0.0, 1.0);
        let c2 = needle(1.0, 1.0, FRAC_PI_2, 1.0);
        assert!(needles_overlap(&c1, &c2, &dom()));
    }

    #[test]
    fn overlap_across_periodic_boundary() {
        // Needles hugging opposite edges of the box touch through the seam.
        let c1 = needle(0.05, 1.0, 0.0, 1.0);
        let c2 = needle(PI - 0.05, 1.0, 0.0, 1.0);
        assert!(needles_overlap(&c1, &c2, &dom()));
        assert!(needles_overlap_images(&c1, &c2, &dom()));
    }

    #[test]
    fn rhombus_square_case() {
        // θ₁=0, θ̃=π/2, eps=1 makes the axis-aligned square of side 1.
        let c1 = needle(0.0, 0.0, 0.0, 1.0);
        let r = excluded_rhombus(&c1, FRAC_PI_2);
        let want = [(-0.5, 0.5), (0.5, 0.5), (0.5, -0.5), (-0.5, -0.5)];
        for (v, (wx, wy)) in r.vertices.iter().zip(want) {
            assert_relative_eq!(v.x, wx, epsilon = 1e-15);
            assert_relative_eq!(v.y, wy, epsilon = 1e-15);
        }
        assert!(!r.degenerate);
        assert_relative_eq!(r.area(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn rhombus_degenerates_to_segment() {
        let c1 = needle(0.0, 0.0, 0.0, 1.0);
        let r = excluded_rhombus(&c1, 0.0);
        assert!(r.degenerate);
        assert_relative_eq!(r.area(), 0.0);
        // Collapse: a segment of length 2·eps from D to B.
        let len = (r.vertices[1] - r.vertices[3]).norm();
        assert_relative_eq!(len, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn rhombus_area_formula() {
        let c1 = needle(1.0, 2.0, 0.7, 0.9);
        for tt in [PI / 6.0, PI / 3.0, 3.0 * PI / 4.0] {
            let r = excluded_rhombus(&c1, tt);
            assert_relative_eq!(r.area(), 0.9 * 0.9 * tt.sin(), max_relative = 1e-13);
        }
    }

    #[test]
    fn rhombus_area_scales_with_eps() {
        let d = Torus2::square(10.0).unwrap();
        let c1 = NeedleConfig::new(Vector2::zeros(), 0.3, 2.0, &d).unwrap();
        let r = excluded_rhombus(&c1, FRAC_PI_4);
        assert_relative_eq!(
            rhombus_area(&r),
            4.0 * FRAC_PI_4.sin(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn unit_square_area() {
        let r = Rhombus {
            vertices: [
                Vector2::new(0.0, 1.0),
                Vector2::new(1.0, 1.0),
                Vector2::new(1.0, 0.0),
                Vector2::new(0.0, 0.0),
            ],
            degenerate: false,
        };
        assert_relative_eq!(rhombus_area(&r), 1.0);
    }

    #[test]
    fn angle_reduction() {
        assert_relative_eq!(reduce_angle(PI + 0.25), 0.25, max_relative = 1e-14);
        assert_relative_eq!(reduce_angle(-0.25), PI - 0.25, max_relative = 1e-14);
        assert_eq!(reduce_angle(-1e-300), 0.0);
    }

    #[test]
    fn invalid_params_rejected() {
        let d = dom();
        assert!(NeedleConfig::new(Vector2::zeros(), 0.0, -1.0, &d).is_err());
        assert!(NeedleConfig::new(Vector2::zeros(), 0.0, PI, &d).is_err());
        assert!(Torus2::new(0.0, 1.0).is_err());
    }

    #[test]
    fn min_image_range() {
        let d = dom();
        let m = d.min_image(Vector2::new(0.1, 0.1), Vector2::new(PI - 0.1, 0.2));
        assert_relative_eq!(m.x, -0.2, max_relative = 1e-12);
        assert_relative_eq!(m.y, 0.1, max_relative = 1e-12);
    }
}
