//! Numerics for two-dimensional Brownian hard needles.
//!
//! A needle is a rigid segment of length `eps` diffusing on a periodic box,
//! with hard-core exclusion between segments. This crate implements every
//! layer of the associated model hierarchy:
//!
//! * [`geometry`] — exact segment geometry on the torus: endpoints, overlap
//!   predicates, and the excluded rhombus swept by one needle's centre around
//!   another at fixed relative angle.
//! * [`particle`] — stochastic simulation of `N` hard needles with rejection
//!   of overlapping moves, cell-list neighbour search, and observables
//!   (nematic order, histograms, mean-square displacements).
//! * [`conformal`] — the excluded-volume response matrix `T(θ̃)` that encodes
//!   how a needle deflects the probability flux of a second needle at relative
//!   angle `θ̃`. Computed two ways: a Schwarz–Christoffel map of the rhombus
//!   exterior (closed form + quadrature), and a brute-force finite-difference
//!   oracle for the underlying exterior Laplace problem.
//! * [`kinetic`] — the nonlocal kinetic PDE for the one-needle phase density
//!   `p(x, θ, t)`, with collision kernels assembled from `T(θ̃)`.
//! * [`hydro`] — the high-rotational-diffusion limit: a nonlinear diffusion
//!   equation for the spatial density, and the hard-disk comparator that
//!   identifies the needle's effective diameter `√2/π · eps`.
//! * [`homogeneous`] — the space-homogeneous limit: a McKean–Vlasov equation
//!   on orientations with attractive kernel `W(θ) = sin θ`, its linear
//!   stability (critical coupling `φ_c = 3π/2`), and stationary states by
//!   fixed-point iteration (the isotropic–nematic transition).
//!
//! Shared conventions: orientations live on `[0, π)` (a needle and its
//! reversal are identical), densities are unit-mass, and every stochastic
//! routine is deterministic given its seed.

pub mod conformal;
pub mod error;
pub mod geometry;
pub mod homogeneous;
pub mod hydro;
pub mod kinetic;
pub mod particle;
pub mod spectral;

pub use conformal::{SCConstant, TMatrix, TTable};
pub use error::{Error, Result};
pub use geometry::{NeedleConfig, Rhombus, Torus2};
