//! The majorant `G`, the separable lifetime integrals and the convergence domains.
//!
//! `G(u) = Σ |K_n| u^n = 2 + (u/2)(1 - cot(u/2))` on `(-2π, 2π)`. The scalar
//! majorant problem `z' = ‖b‖ G(z)`, `z(0) = ‖a‖` reaches `2π` at
//!
//! ```text
//! β̃ = (1/‖b‖) ∫_{‖a‖}^{2π} du / G(u)
//! ```
//!
//! and the pair `(a, b)` lies in the enlarged domain `Γ` exactly when `‖a‖ < 2π`
//! and `β̃ > 1`. The classical domain is `Δ = {‖a‖ + ‖b‖ < ln 2}`.

use serde::{Deserialize, Serialize};

use crate::coeffs::scaled_abs_kn;
use crate::error::{Error, Result};
use crate::liealg::TWO_PI;
use crate::quad::{adaptive_simpson, Quadrature, DEFAULT_DEPTH, DEFAULT_TOL};

/// Below this `|u|` the closed form loses digits to the `cot` pole and the series is used.
const SERIES_SWITCH: f64 = 1e-3;

/// `(‖a‖, ‖b‖)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainQuery {
    pub norm_a: f64,
    pub norm_b: f64,
}

impl DomainQuery {
    pub fn new(norm_a: f64, norm_b: f64) -> Result<Self> {
        for (name, v) in [("norm_a", norm_a), ("norm_b", norm_b)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(DomainQuery { norm_a, norm_b })
    }

    /// The query with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        DomainQuery {
            norm_a: self.norm_b,
            norm_b: self.norm_a,
        }
    }
}

/// Endpoints of the maximal interval of the scalar majorant solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeBounds {
    /// Backward lifetime, `≤ 0`.
    pub alpha_tilde: f64,
    /// Forward lifetime, `> 0`.
    pub beta_tilde: f64,
    /// Quadrature error estimate on `beta_tilde`.
    pub beta_error: f64,
}

fn check_range(u: f64) -> Result<()> {
    if !(u.abs() < TWO_PI) {
        return Err(Error::OutOfRange { value: u });
    }
    Ok(())
}

/// `G(u) = 2 + (u/2)(1 - cot(u/2))`, switching to the series near 0.
pub fn g_closed(u: f64) -> Result<f64> {
    check_range(u)?;
    if u.abs() < SERIES_SWITCH {
        // 1 + u/2 + u²/12 + u⁴/720 + ...; the next term is below 1e-20
        let u2 = u * u;
        return Ok(1.0 + 0.5 * u + u2 / 12.0 + u2 * u2 / 720.0 + u2 * u2 * u2 / 30240.0);
    }
    let h = 0.5 * u;
    Ok(2.0 + h - h / h.tan())
}

/// Truncated Maclaurin series `Σ_{n=0}^{n_max} |K_n| u^n`.
pub fn g_series(u: f64, n_max: usize) -> Result<f64> {
    check_range(u)?;
    // |K_n| u^n = (|K_n| (2π)^n) (u/2π)^n keeps high orders clear of underflow
    let r = u / TWO_PI;
    let mut acc = 0.0;
    for n in (0..=n_max).rev() {
        acc = acc * r + scaled_abs_kn(n);
    }
    Ok(acc)
}

/// `1/G(u)` on `(-2π, 2π)`, continuously extended by `0` at and beyond `±2π`.
pub fn inv_g(u: f64) -> f64 {
    match g_closed(u) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// `∫_{norm_a}^{2π} du / G(u)`, the largest admissible `‖b‖` for this `‖a‖`.
pub fn gamma_bound(norm_a: f64) -> Result<Quadrature> {
    gamma_bound_with_tol(norm_a, DEFAULT_TOL)
}

pub fn gamma_bound_with_tol(norm_a: f64, tol: f64) -> Result<Quadrature> {
    check_range(norm_a)?;
    Ok(adaptive_simpson(inv_g, norm_a, TWO_PI, tol, DEFAULT_DEPTH))
}

/// `α̃` and `β̃` for the scalar majorant problem.
pub fn lifetime_bounds(q: &DomainQuery) -> Result<LifetimeBounds> {
    lifetime_bounds_with_tol(q, DEFAULT_TOL)
}

pub fn lifetime_bounds_with_tol(q: &DomainQuery, tol: f64) -> Result<LifetimeBounds> {
    check_range(q.norm_a)?;
    if q.norm_b == 0.0 {
        return Err(Error::DegenerateB);
    }
    let forward = adaptive_simpson(inv_g, q.norm_a, TWO_PI, tol, DEFAULT_DEPTH);
    let backward = adaptive_simpson(inv_g, -TWO_PI, q.norm_a, tol, DEFAULT_DEPTH);
    Ok(LifetimeBounds {
        alpha_tilde: -backward.value / q.norm_b,
        beta_tilde: forward.value / q.norm_b,
        beta_error: forward.error / q.norm_b,
    })
}

/// `‖a‖ + ‖b‖ < ln 2`.
pub fn in_delta(q: &DomainQuery) -> bool {
    q.norm_a + q.norm_b < std::f64::consts::LN_2
}

/// `‖a‖ < 2π` and `β̃ > 1` (a zero `‖b‖` counts as inside).
pub fn in_gamma(q: &DomainQuery) -> bool {
    if !(q.norm_a < TWO_PI) {
        return false;
    }
    match lifetime_bounds(q) {
        Ok(bounds) => bounds.beta_tilde > 1.0,
        Err(Error::DegenerateB) => true,
        Err(_) => false,
    }
}

/// The mirrored domain with `a` and `b` interchanged.
pub fn in_gamma_swapped(q: &DomainQuery) -> bool {
    in_gamma(&q.swapped())
}

/// `(norm_a, max_norm_b)` along the boundary of `Γ`, with `norm_a = 2πk/grid_points`.
pub fn gamma_boundary_table(grid_points: usize) -> Result<Vec<(f64, f64)>> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument(
            "the boundary table needs at least 2 grid points".into(),
        ));
    }
    (0..grid_points)
        .map(|k| {
            let norm_a = TWO_PI * k as f64 / grid_points as f64;
            gamma_bound(norm_a).map(|q| (norm_a, q.value))
        })
        .collect()
}
