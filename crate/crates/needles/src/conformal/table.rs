//! Tabulated response matrix with fast interpolation.
//!
//! The entries of T(θ̃) extend analytically to the closed interval [0, π]
//! (endpoint limits diag(0, π)), so polynomial interpolation at
//! Chebyshev–Lobatto nodes converges geometrically. A modest node count
//! reaches far below the 1e−6 guarantee while evaluation is a cheap O(n)
//! barycentric sum — this is what grid-building consumers (the kinetic kernel,
//! figure emission) use instead of re-running quadrature per angle.
//!
//! The node set is built symmetric about π/2 with the midpoint snapped to
//! exactly π/2, so the square case is a node and `eval(π/2)` reproduces
//! `t_matrix(π/2)` bit-for-bit.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{t_matrix, TMatrix};

/// Interpolation table for the response matrix over [0, π].
#[derive(Debug, Clone)]
pub struct TTable {
    /// Chebyshev–Lobatto nodes in ascending order, including both endpoints.
    nodes: Vec<f64>,
    /// Barycentric weights (second-kind points: (−1)^j, halved at the ends).
    weights: Vec<f64>,
    t11: Vec<f64>,
    t12: Vec<f64>,
    t22: Vec<f64>,
}

/// Build a response-matrix table with at least `grid_size` Chebyshev–Lobatto
/// nodes (rounded up to an odd count so that π/2 is a node). Endpoint columns
/// hold the analytic limits diag(0, π) of the open-interval formula.
pub fn build_t_table(grid_size: usize) -> Result<TTable> {
    if grid_size < 16 {
        return Err(Error::invalid(
            "grid_size",
            format!("need at least 16 nodes, got {grid_size}"),
        ));
    }
    let n = if grid_size % 2 == 0 {
        grid_size + 1
    } else {
        grid_size
    };
    let mut nodes = vec![0.0; n];
    let half = n / 2;
    for j in 0..=half {
        // θ_j = (π/2)(1 − cos(jπ/(n−1))) on the first half; mirror the rest
        // so the grid is exactly symmetric and the midpoint exactly π/2.
        let x = (j as f64 * PI / (n as f64 - 1.0)).cos();
        nodes[j] = 0.5 * PI * (1.0 - x);
        nodes[n - 1 - j] = PI - nodes[j];
    }
    nodes[0] = 0.0;
    nodes[half] = 0.5 * PI;
    nodes[n - 1] = PI;

    let mut t11 = vec![0.0; n];
    let mut t12 = vec![0.0; n];
    let mut t22 = vec![0.0; n];
    for j in 0..n {
        let t = if j == 0 || j == n - 1 {
            // Slit limit of the formula as θ̃ → {0, π}.
            TMatrix {
                t11: 0.0,
                t12: 0.0,
                t22: PI,
            }
        } else {
            t_matrix(nodes[j])?
        };
        t11[j] = t.t11;
        t12[j] = t.t12;
        t22[j] = t.t22;
    }

    let mut weights = vec![0.0; n];
    for (j, w) in weights.iter_mut().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *w = if j == 0 || j == n - 1 {
            0.5 * sign
        } else {
            sign
        };
    }

    Ok(TTable {
        nodes,
        weights,
        t11,
        t12,
        t22,
    })
}

impl TTable {
    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node angles (ascending, endpoints included).
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Interpolated response matrix at `theta` ∈ [0, π]. Exact (stored value)
    /// when `theta` is a node.
    pub fn eval(&self, theta: f64) -> Result<TMatrix> {
        if !(0.0..=PI).contains(&theta) || !theta.is_finite() {
            return Err(Error::invalid(
                "theta",
                format!("table domain is [0, π], got {theta}"),
            ));
        }
        // Barycentric form: p(θ) = Σ w_j f_j/(θ−θ_j) / Σ w_j/(θ−θ_j);
        // node hits short-circuit to the stored value.
        let mut num11 = 0.0;
        let mut num12 = 0.0;
        let mut num22 = 0.0;
        let mut den = 0.0;
        for j in 0..self.nodes.len() {
            let d = theta - self.nodes[j];
            if d == 0.0 {
                return Ok(TMatrix {
                    t11: self.t11[j],
                    t12: self.t12[j],
                    t22: self.t22[j],
                });
            }
            let c = self.weights[j] / d;
            num11 += c * self.t11[j];
            num12 += c * self.t12[j];
            num22 += c * self.t22[j];
            den += c;
        }
        Ok(TMatrix {
            t11: num11 / den,
            t12: num12 / den,
            t22: num22 / den,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::t_matrix;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Interpolation accuracy guarantee at off-node angles.
    const INTERP_TOL: f64 = 1e-6;

    #[test]
    fn exact_at_square_node() {
        let table = build_t_table(33).unwrap();
        let direct = t_matrix(PI / 2.0).unwrap();
        let interp = table.eval(PI / 2.0).unwrap();
        // π/2 is a node: stored value returned bit-for-bit.
        assert_eq!(direct.t11, interp.t11);
        assert_eq!(direct.t12, interp.t12);
        assert_eq!(direct.t22, interp.t22);
    }

    #[test]
    fn interpolation_error_below_guarantee() {
        let table = build_t_table(33).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x7ab1e);
        for _ in 0..1000 {
            let tt: f64 = rng.gen_range(1e-3..PI - 1e-3);
            let direct = t_matrix(tt).unwrap();
            let interp = table.eval(tt).unwrap();
            assert_abs_diff_eq!(interp.t11, direct.t11, epsilon = INTERP_TOL);
            assert_abs_diff_eq!(interp.t12, direct.t12, epsilon = INTERP_TOL);
            assert_abs_diff_eq!(interp.t22, direct.t22, epsilon = INTERP_TOL);
        }
    }

    #[test]
    fn minimal_grid_still_accurate() {
        let table = build_t_table(16).unwrap(); // rounds up to 17 nodes
        assert_eq!(table.len(), 17);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let tt: f64 = rng.gen_range(1e-3..PI - 1e-3);
            let direct = t_matrix(tt).unwrap();
            let interp = table.eval(tt).unwrap();
            assert_abs_diff_eq!(interp.t11, direct.t11, epsilon = INTERP_TOL);
            assert_abs_diff_eq!(interp.t12, direct.t12, epsilon = INTERP_TOL);
            assert_abs_diff_eq!(interp.t22, direct.t22, epsilon = INTERP_TOL);
        }
    }

    #[test]
    fn off_diagonal_changes_sign_once_at_midpoint() {
        let table = build_t_table(33).unwrap();
        let m = 4096;
        let mut changes = 0;
        let mut prev = table.eval(PI / m as f64).unwrap().t12;
        for k in 2..m {
            let tt = PI * k as f64 / m as f64;
            let cur = table.eval(tt).unwrap().t12;
            if prev.signum() != cur.signum() && cur != 0.0 {
                changes += 1;
                // The flip must straddle π/2.
                assert!((tt - PI / 2.0).abs() < PI / m as f64 * 1.5);
            }
            prev = cur;
        }
        assert_eq!(changes, 1);
    }

    #[test]
    fn endpoint_limits() {
        let table = build_t_table(33).unwrap();
        let t0 = table.eval(0.0).unwrap();
        assert_eq!(t0.t11, 0.0);
        assert_eq!(t0.t22, PI);
        let t1 = table.eval(PI).unwrap();
        assert_eq!(t1.t11, 0.0);
        assert_eq!(t1.t22, PI);
        assert!(table.eval(-0.1).is_err());
        assert!(table.eval(PI + 0.1).is_err());
        assert!(build_t_table(8).is_err());
    }
}
