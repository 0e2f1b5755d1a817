//! Radial functions and weighted quadrature on `(0, ∞)`.
//!
//! A radial integral over `ℝ^N` reduces to `ω_{N-1} ∫_0^∞ g(r) r^{N-1} dr`.

pub mod gauss;
pub mod profile;
pub mod quadrature;

pub use profile::{
    bump_profile, dilate, extremal_profile, extremal_profile_q, half_power_transform, perturbed,
    q_extremal_sign_warning, smooth_truncation, Decay, RadialProfile, Shape,
};
pub use quadrature::{
    adapted_rule, integrate, integrate_domain, integrate_interval, Domain, Integral, NodeRule, QuadratureScheme,
};

use crate::error::{CknError, Result};

/// Surface area `2π^{N/2}/Γ(N/2)` of the unit sphere in `ℝ^N`.
pub fn sphere_area(n: u32) -> f64 {
    use std::f64::consts::PI;
    assert!(n >= 1, "sphere_area needs N >= 1");
    // S_1 = 2, S_2 = 2π, S_{k+2} = 2π S_k / k
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    let mut s = if n % 2 == 1 { 2.0 } else { 2.0 * PI };
    while k < n {
        s *= 2.0 * PI / k as f64;
        k += 2;
    }
    s
}

/// Integration domain of `|f|^q` (or `|f'|^q`) for a profile.
pub fn profile_domain(u: &RadialProfile, q: f64) -> Domain {
    let (lo, hi) = u.support();
    Domain { lo, hi, tail_start: u.decay().powered(q).tail_start() }
}

/// Merges the domains of several profiles.
pub fn union_domain(parts: &[Domain]) -> Domain {
    let live: Vec<&Domain> = parts.iter().filter(|d| !d.is_empty()).collect();
    if live.is_empty() {
        return Domain::new(0.0, 0.0);
    }
    let lo = live.iter().map(|d| d.lo).fold(f64::INFINITY, f64::min);
    let hi = live.iter().map(|d| d.hi).fold(0.0, f64::max);
    let tail_start = live.iter().filter_map(|d| d.tail_start).fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
    Domain { lo, hi, tail_start }
}

/// Rejects `∫ |f^{(k)}|^q r^{N-1-γ}` when it diverges at the origin.
pub fn check_origin_integrability(u: &RadialProfile, use_derivative: bool, q: f64, gamma: f64, n: u32) -> Result<()> {
    let Some((k, dk)) = u.shape.origin_orders() else {
        return Ok(());
    };
    let order = if use_derivative { dk } else { k };
    if order.is_infinite() {
        return Ok(());
    }
    let exponent = q * order + n as f64 - 1.0 - gamma;
    if exponent <= -1.0 {
        return Err(CknError::Integrability(format!(
            "{}: integrand ~ r^{exponent:.6} at the origin (weight exponent {gamma})",
            u.label
        )));
    }
    Ok(())
}

/// `ω_{N-1} ∫ |f or f'|^q r^{N-1-γ} dr` with its quadrature report.
pub fn weighted_norm(
    u: &RadialProfile,
    use_derivative: bool,
    q: f64,
    gamma: f64,
    n: u32,
    scheme: &QuadratureScheme,
) -> Result<Integral> {
    if !(q > 0.0) {
        return Err(CknError::InvalidArgument(format!("exponent must be positive, got {q}")));
    }
    if u.is_zero() {
        return Ok(Integral::default());
    }
    check_origin_integrability(u, use_derivative, q, gamma, n)?;
    let e = n as f64 - 1.0 - gamma;
    let g = |r: f64| {
        let (f, df) = u.eval2(r);
        let v = if use_derivative { df } else { f };
        if v == 0.0 {
            0.0
        } else {
            v.abs().powf(q) * r.powf(e)
        }
    };
    let omega = sphere_area(n);
    let mut out = integrate_domain(&g, profile_domain(u, q), scheme)?;
    out.value *= omega;
    out.abs_value *= omega;
    out.error_estimate *= omega;
    out.head *= omega;
    out.tail_bound *= omega;
    Ok(out)
}

/// Value of [`weighted_norm`].
pub fn weighted_norm_term(
    u: &RadialProfile,
    use_derivative: bool,
    q: f64,
    gamma: f64,
    n: u32,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    Ok(weighted_norm(u, use_derivative, q, gamma, n, scheme)?.value)
}
