//! Integral functionals: the three CKN terms, both deficits, the
//! right-hand sides of the deficit identities and the stability distances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::params::{require_hypotheses, sharp_constant_lp, CknParams, TheoremId};
use crate::radial::{
    check_origin_integrability, extremal_profile, half_power_transform, integrate_domain, profile_domain,
    sphere_area, union_domain, weighted_norm, QuadratureScheme, RadialProfile,
};
use crate::vectorineq::{g_p_scalar, half_power};

/// Deficits below `CONDITION_FACTOR · rel_tol · (sum of |terms|)` are
/// reported as unresolved.
pub const CONDITION_FACTOR: f64 = 10.0;

/// Quadrature error estimates (refinement error plus tail bound) per term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermErrors {
    pub grad: f64,
    pub mass: f64,
    pub mixed: f64,
}

/// `∫|∇u|^p/|x|^{pb}`, `∫|u|^p/|x|^{pa}` and `∫|u|^p/|x|^{(p-1)a+b+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CknTerms {
    pub grad: f64,
    pub mass: f64,
    pub mixed: f64,
    pub params: CknParams,
    pub errors: TermErrors,
}

impl CknTerms {
    /// `grad^{1/p} · mass^{(p-1)/p}`.
    pub fn product(&self) -> f64 {
        let p = self.params.p;
        self.grad.powf(1.0 / p) * self.mass.powf((p - 1.0) / p)
    }

    pub fn is_zero(&self) -> bool {
        self.grad == 0.0 && self.mass == 0.0 && self.mixed == 0.0
    }
}

pub fn ckn_terms(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<CknTerms> {
    params.validate()?;
    let p = params.p;
    let n = params.n;
    let g = weighted_norm(u, true, p, params.grad_weight(), n, scheme)?;
    let m = weighted_norm(u, false, p, params.mass_weight(), n, scheme)?;
    let x = weighted_norm(u, false, p, params.mixed_weight(), n, scheme)?;
    let err = |i: &crate::radial::Integral| i.error_estimate + i.tail_bound;
    Ok(CknTerms {
        grad: g.value,
        mass: m.value,
        mixed: x.value,
        params: *params,
        errors: TermErrors { grad: err(&g), mass: err(&m), mixed: err(&x) },
    })
}

/// A deficit with its resolution estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deficit {
    pub value: f64,
    /// Magnitude below which `value` is indistinguishable from rounding
    /// and quadrature error.
    pub condition: f64,
    pub resolved: bool,
    pub terms: CknTerms,
}

impl Deficit {
    fn new(value: f64, magnitude: f64, rel_tol: f64, terms: CknTerms) -> Self {
        let condition = CONDITION_FACTOR * rel_tol * magnitude;
        Self { value, condition, resolved: value.abs() > condition, terms }
    }
}

fn nonzero_terms(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<CknTerms> {
    if u.is_zero() {
        return Err(CknError::ZeroFunction);
    }
    let terms = ckn_terms(u, params, scheme)?;
    if terms.is_zero() {
        return Err(CknError::ZeroFunction);
    }
    Ok(terms)
}

/// Deficit of the scale-invariant inequality from precomputed terms.
pub fn deficit_si_from_terms(terms: &CknTerms, constant: f64, rel_tol: f64) -> Deficit {
    let lhs = terms.product();
    let rhs = constant * terms.mixed;
    Deficit::new(lhs - rhs, lhs.abs() + rhs.abs(), rel_tol, *terms)
}

/// Deficit of the scale-invariant inequality from precomputed terms.
pub fn deficit_sni_from_terms(terms: &CknTerms, rel_tol: f64) -> Deficit {
    let p = terms.params.p;
    let k = terms.params.sharp_numerator().abs();
    let pos = terms.grad + (p - 1.0) * terms.mass;
    let neg = k * terms.mixed;
    Deficit::new(pos - neg, pos.abs() + neg.abs(), rel_tol, *terms)
}

/// `grad^{1/p} mass^{(p-1)/p} - K · mixed` with its condition estimate.
pub fn deficit_si_detailed(
    u: &RadialProfile,
    params: &CknParams,
    scheme: &QuadratureScheme,
    constant_override: Option<f64>,
) -> Result<Deficit> {
    let terms = nonzero_terms(u, params, scheme)?;
    let k = constant_override.unwrap_or_else(|| sharp_constant_lp(params));
    Ok(deficit_si_from_terms(&terms, k, scheme.rel_tol))
}

pub fn deficit_si(
    u: &RadialProfile,
    params: &CknParams,
    scheme: &QuadratureScheme,
    constant_override: Option<f64>,
) -> Result<f64> {
    Ok(deficit_si_detailed(u, params, scheme, constant_override)?.value)
}

/// `grad + (p-1) mass - |N-(p-1)a-b-1| mixed` with its condition estimate.
pub fn deficit_sni_detailed(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<Deficit> {
    let terms = nonzero_terms(u, params, scheme)?;
    Ok(deficit_sni_from_terms(&terms, scheme.rel_tol))
}

pub fn deficit_sni(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<f64> {
    Ok(deficit_sni_detailed(u, params, scheme)?.value)
}

/// `ω ∫ G_p(α X, β Y) r^{N-1-pb} dr` with `X = -f r^{b-a}`, `Y = f'`.
fn gp_identity_integral(
    u: &RadialProfile,
    params: &CknParams,
    alpha: f64,
    beta: f64,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    let p = params.p;
    let ba = params.b - params.a;
    let e = params.dim() - 1.0 - params.grad_weight();
    check_origin_integrability(u, false, p, params.grad_weight() - p * ba, params.n)?;
    check_origin_integrability(u, true, p, params.grad_weight(), params.n)?;
    let g = |r: f64| {
        let (f, df) = u.eval2(r);
        if f == 0.0 && df == 0.0 {
            return 0.0;
        }
        let x = -alpha * f * r.powf(ba);
        let y = beta * df;
        // on the manifold X and Y agree up to rounding, which G_p would
        // amplify into a noise floor the adaptive refinement cannot resolve
        if resolved_difference(x, y) == 0.0 {
            return 0.0;
        }
        g_p_scalar(x, y, p) * r.powf(e)
    };
    let out = integrate_domain(&g, profile_domain(u, p), scheme)?;
    Ok(sphere_area(params.n) * out.value)
}

/// Right-hand side of the identity for the non-invariant deficit.
pub fn identity_rhs_sni(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<f64> {
    require_hypotheses(TheoremId::Thm6, params)?;
    if u.is_zero() {
        return Ok(0.0);
    }
    gp_identity_integral(u, params, 1.0, 1.0, scheme)
}

/// Right-hand side of the identity for the scale-invariant deficit, given
/// the CKN terms of `u`.
pub fn identity_rhs_si_with_terms(
    u: &RadialProfile,
    terms: &CknTerms,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    let params = &terms.params;
    require_hypotheses(TheoremId::Thm6, params)?;
    if terms.mass == 0.0 || terms.grad == 0.0 {
        return Err(CknError::ZeroFunction);
    }
    let p = params.p;
    let ratio = terms.grad / terms.mass;
    let alpha = ratio.powf(1.0 / (p * p));
    let beta = ratio.powf(-(p - 1.0) / (p * p));
    Ok(gp_identity_integral(u, params, alpha, beta, scheme)? / p)
}

/// Two passes: the CKN terms first, then the rescaled `G_p` integral.
pub fn identity_rhs_si(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<f64> {
    let terms = nonzero_terms(u, params, scheme)?;
    identity_rhs_si_with_terms(u, &terms, scheme)
}

/// Which stability distance to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityVariant {
    Thm1Dist,
    Thm2Dist,
    Thm3Dist,
    Thm4Dist,
    Thm5Dist,
    ThmCDist,
}

/// `x - y`, or `0` when it is at the rounding level of the operands.
#[inline]
fn resolved_difference(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() <= 64.0 * f64::EPSILON * x.abs().max(y.abs()) {
        0.0
    } else {
        d
    }
}

/// Shape of a distance integrand and its weight exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    /// `∫ |H(u) - H(v)|² r^{-γ}` with `H(t) = sign(t)|t|^{p/2}`
    HalfPowerL2 { gamma: f64 },
    /// `∫ |u - v|^p r^{-γ}`
    PowerLp { gamma: f64 },
    /// `∫ |u' - v'|^p r^{-γ_g} + ∫ |u - v|^p r^{-γ_m}`
    GradMass { gamma_grad: f64, gamma_mass: f64 },
    /// `∫ |u' - v'|^p r^{-γ}`
    Grad { gamma: f64 },
}

impl DistanceKind {
    /// Pointwise integrand without the `r^{N-1}` volume factor and weights.
    /// Returns `(mass part, gradient part)`.
    #[inline]
    pub fn parts(&self, p: f64, (uf, udf): (f64, f64), (vf, vdf): (f64, f64)) -> (f64, f64) {
        match self {
            DistanceKind::HalfPowerL2 { .. } => {
                let (hu, hv) = (half_power(uf, p), half_power(vf, p));
                let d = resolved_difference(hu, hv);
                (d * d, 0.0)
            }
            DistanceKind::PowerLp { .. } => (resolved_difference(uf, vf).abs().powf(p), 0.0),
            DistanceKind::GradMass { .. } => (
                resolved_difference(uf, vf).abs().powf(p),
                resolved_difference(udf, vdf).abs().powf(p),
            ),
            DistanceKind::Grad { .. } => (0.0, resolved_difference(udf, vdf).abs().powf(p)),
        }
    }

    /// Weight exponents `(γ_mass, γ_grad)`; unused parts get `0`.
    pub fn gammas(&self) -> (f64, f64) {
        match *self {
            DistanceKind::HalfPowerL2 { gamma } | DistanceKind::PowerLp { gamma } => (gamma, 0.0),
            DistanceKind::GradMass { gamma_grad, gamma_mass } => (gamma_mass, gamma_grad),
            DistanceKind::Grad { gamma } => (0.0, gamma),
        }
    }

    pub fn uses_mass(&self) -> bool {
        !matches!(self, DistanceKind::Grad { .. })
    }

    pub fn uses_grad(&self) -> bool {
        matches!(self, DistanceKind::GradMass { .. } | DistanceKind::Grad { .. })
    }

}

impl StabilityVariant {
    pub const ALL: [StabilityVariant; 6] = [
        StabilityVariant::Thm1Dist,
        StabilityVariant::Thm2Dist,
        StabilityVariant::Thm3Dist,
        StabilityVariant::Thm4Dist,
        StabilityVariant::Thm5Dist,
        StabilityVariant::ThmCDist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StabilityVariant::Thm1Dist => "thm1-dist",
            StabilityVariant::Thm2Dist => "thm2-dist",
            StabilityVariant::Thm3Dist => "thm3-dist",
            StabilityVariant::Thm4Dist => "thm4-dist",
            StabilityVariant::Thm5Dist => "thm5-dist",
            StabilityVariant::ThmCDist => "thmc-dist",
        }
    }

    pub fn for_theorem(theorem: TheoremId) -> Option<StabilityVariant> {
        match theorem {
            TheoremId::Thm1 => Some(StabilityVariant::Thm1Dist),
            TheoremId::Thm2 => Some(StabilityVariant::Thm2Dist),
            TheoremId::Thm3 => Some(StabilityVariant::Thm3Dist),
            TheoremId::Thm4 => Some(StabilityVariant::Thm4Dist),
            TheoremId::Thm5 => Some(StabilityVariant::Thm5Dist),
            TheoremId::ThmC => Some(StabilityVariant::ThmCDist),
            TheoremId::Thm6 => None,
        }
    }

    pub fn lambda_pinned(self) -> bool {
        matches!(self, StabilityVariant::Thm3Dist | StabilityVariant::Thm4Dist | StabilityVariant::Thm5Dist)
    }

    fn needs_small_p(self) -> bool {
        matches!(self, StabilityVariant::Thm1Dist | StabilityVariant::Thm3Dist)
    }

    pub fn kind(self, params: &CknParams) -> DistanceKind {
        match self {
            StabilityVariant::Thm1Dist | StabilityVariant::Thm3Dist => {
                DistanceKind::HalfPowerL2 { gamma: params.mass_weight() }
            }
            StabilityVariant::Thm2Dist => DistanceKind::PowerLp { gamma: params.mass_weight() },
            StabilityVariant::Thm4Dist => {
                DistanceKind::GradMass { gamma_grad: params.grad_weight(), gamma_mass: params.mass_weight() }
            }
            StabilityVariant::Thm5Dist | StabilityVariant::ThmCDist => {
                DistanceKind::PowerLp { gamma: params.mixed_weight() }
            }
        }
    }

    /// Checks the exponent range of `p` and the pinned `λ`.
    pub fn check(self, params: &CknParams, lam: f64) -> Result<()> {
        let p = params.p;
        if self.needs_small_p() && !(p > 1.0 && p < 2.0) {
            return Err(CknError::InvalidArgument(format!("{} needs 1 < p < 2, got {p}", self.name())));
        }
        if !self.needs_small_p() && !(p >= 2.0) {
            return Err(CknError::InvalidArgument(format!("{} needs p >= 2, got {p}", self.name())));
        }
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(CknError::InvalidArgument(format!("lam must be positive, got {lam}")));
        }
        if self.lambda_pinned() && (lam - 1.0).abs() > 1e-12 {
            return Err(CknError::InvalidArgument(format!("{} pins lam = 1, got {lam}", self.name())));
        }
        Ok(())
    }
}

impl fmt::Display for StabilityVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StabilityVariant {
    type Err = CknError;

    fn from_str(s: &str) -> Result<Self> {
        StabilityVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CknError::Config(format!("unknown stability variant '{s}'")))
    }
}

/// Exponent of the half-power distance weight before and after imposing
/// `a = Nb/(N-p)`: `(N(pa + 2b - 2a)/(N-2), pa)`.
pub fn half_power_weight_exponents(params: &CknParams) -> (f64, f64) {
    let n = params.dim();
    let (p, a, b) = (params.p, params.a, params.b);
    (n * (p * a + 2.0 * b - 2.0 * a) / (n - 2.0), p * a)
}

/// `ω ∫ kind(u, v)` for arbitrary profiles `u`, `v`.
pub fn distance_between(
    u: &RadialProfile,
    v: &RadialProfile,
    params: &CknParams,
    kind: DistanceKind,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    let p = params.p;
    let n = params.n;
    let (gm, gg) = kind.gammas();
    for w in [u, v] {
        if kind.uses_mass() {
            check_origin_integrability(w, false, p, gm, n)?;
        }
        if kind.uses_grad() {
            check_origin_integrability(w, true, p, gg, n)?;
        }
    }
    let em = params.dim() - 1.0 - gm;
    let eg = params.dim() - 1.0 - gg;
    let g = |r: f64| {
        let (m, d) = kind.parts(p, u.eval2(r), v.eval2(r));
        let mut s = 0.0;
        if m != 0.0 {
            s += m * r.powf(em);
        }
        if d != 0.0 {
            s += d * r.powf(eg);
        }
        s
    };
    let domain = union_domain(&[profile_domain(u, p), profile_domain(v, p)]);
    if domain.is_empty() {
        return Ok(0.0);
    }
    Ok(sphere_area(n) * integrate_domain(&g, domain, scheme)?.value)
}

/// The variant's distance between `u` and `v = c·exp(-r^s/(s lam^s))`.
pub fn stability_distance(
    u: &RadialProfile,
    params: &CknParams,
    variant: StabilityVariant,
    c: f64,
    lam: f64,
    scheme: &QuadratureScheme,
) -> Result<f64> {
    params.validate()?;
    variant.check(params, lam)?;
    let v = extremal_profile(params, c, lam)?;
    distance_between(u, &v, params, variant.kind(params), scheme)
}

/// `ω ∫ |H(u)|² r^{N-1-pa}` for the half-power variants, which equals the
/// distance at `c = 0`.
pub fn half_power_norm(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> Result<f64> {
    let h = half_power_transform(u, params.p)?;
    Ok(weighted_norm(&h, false, 2.0, params.mass_weight(), params.n, scheme)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{hydrogen, thm1_family, thm5_family};
    use crate::radial::{bump_profile, dilate, perturbed};
    use std::f64::consts::PI;

    fn scheme() -> QuadratureScheme {
        QuadratureScheme::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn exponential_terms_all_equal_pi() {
        let params = hydrogen(3);
        let u = extremal_profile(&params, 1.0, 1.0).unwrap();
        let t = ckn_terms(&u, &params, &scheme()).unwrap();
        assert!(rel(t.grad, PI) < 1e-10);
        assert!(rel(t.mass, PI) < 1e-10);
        assert!(rel(t.mixed, PI) < 1e-10);
    }

    #[test]
    fn zero_profile() {
        let params = hydrogen(3);
        let t = ckn_terms(&RadialProfile::zero(), &params, &scheme()).unwrap();
        assert!(t.is_zero());
        assert_eq!(deficit_si(&RadialProfile::zero(), &params, &scheme(), None), Err(CknError::ZeroFunction));
        assert_eq!(deficit_sni(&RadialProfile::zero(), &params, &scheme()), Err(CknError::ZeroFunction));
        assert_eq!(identity_rhs_sni(&RadialProfile::zero(), &params, &scheme()).unwrap(), 0.0);
    }

    #[test]
    fn extremals_attain_both_inequalities() {
        for params in [thm1_family(3, 1.5), hydrogen(3), thm5_family(4, 2.0)] {
            for lam in [0.5, 1.0, 2.0] {
                let u = extremal_profile(&params, 1.3, lam).unwrap();
                let d = deficit_si_detailed(&u, &params, &scheme(), None).unwrap();
                assert!(d.value.abs() <= 1e-9 * d.terms.product(), "{params} lam={lam}: {}", d.value);
                let r_si = identity_rhs_si(&u, &params, &scheme()).unwrap();
                assert!(r_si.abs() <= 1e-9 * d.terms.product());
            }
            let u = extremal_profile(&params, 1.0, 1.0).unwrap();
            assert!(deficit_sni(&u, &params, &scheme()).unwrap().abs() < 1e-9);
            assert!(identity_rhs_sni(&u, &params, &scheme()).unwrap().abs() < 1e-12);
            for lam in [0.5, 2.0] {
                let u = extremal_profile(&params, 1.0, lam).unwrap();
                assert!(deficit_sni(&u, &params, &scheme()).unwrap() > 1e-6);
            }
        }
    }

    #[test]
    fn identities_hold_for_bumps() {
        for params in [thm1_family(3, 1.5), hydrogen(3), CknParams { n: 5, p: 3.0, a: 0.2, b: 0.5 }] {
            for (r0, r1) in [(0.5, 2.0), (1.0, 6.0)] {
                let u = bump_profile(r0, r1, 1.0).unwrap();
                let s = deficit_sni(&u, &params, &scheme()).unwrap();
                let r_sni = identity_rhs_sni(&u, &params, &scheme()).unwrap();
                assert!((s - r_sni).abs() <= 1e-9 * (1.0 + s.abs()), "{params}: {s} vs {r_sni}");
                let si = deficit_si(&u, &params, &scheme(), None).unwrap();
                let r_si = identity_rhs_si(&u, &params, &scheme()).unwrap();
                assert!((si - r_si).abs() <= 1e-9 * (1.0 + si.abs()), "{params}: {si} vs {r_si}");
                assert!(si > 0.0 && s > 0.0);
            }
        }
    }

    #[test]
    fn sni_reduces_to_l2_form() {
        let params = hydrogen(3);
        let u = bump_profile(0.5, 3.0, 2.0).unwrap();
        let t = ckn_terms(&u, &params, &scheme()).unwrap();
        let expected = t.grad + t.mass - 2.0 * t.mixed;
        assert!(rel(deficit_sni(&u, &params, &scheme()).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn am_gm_between_terms() {
        let params = thm1_family(3, 1.5);
        let u = bump_profile(0.3, 2.0, 1.0).unwrap();
        let t = ckn_terms(&u, &params, &scheme()).unwrap();
        let p = params.p;
        assert!(t.product() <= t.grad / p + (p - 1.0) * t.mass / p);
    }

    #[test]
    fn deficit_is_dilation_invariant() {
        let params = thm1_family(3, 1.5);
        let u = bump_profile(0.5, 2.0, 1.0).unwrap();
        let base = deficit_si(&u, &params, &scheme(), None).unwrap();
        let lam: f64 = 3.0;
        let ul = dilate(&u, lam.powf(params.scale_exponent()), lam).unwrap();
        assert!(rel(deficit_si(&ul, &params, &scheme(), None).unwrap(), base) < 1e-9);
    }

    #[test]
    fn distance_variants_vanish_on_the_manifold() {
        let small = thm1_family(3, 1.5);
        let big = thm5_family(4, 2.0);
        let cases = [
            (small, StabilityVariant::Thm1Dist, 2.0),
            (small, StabilityVariant::Thm3Dist, 1.0),
            (hydrogen(3), StabilityVariant::Thm2Dist, 0.7),
            (hydrogen(3), StabilityVariant::Thm4Dist, 1.0),
            (big, StabilityVariant::Thm5Dist, 1.0),
            (big, StabilityVariant::ThmCDist, 3.0),
        ];
        for (params, variant, lam) in cases {
            let u = extremal_profile(&params, 0.8, lam).unwrap();
            assert_eq!(stability_distance(&u, &params, variant, 0.8, lam, &scheme()).unwrap(), 0.0);
            let off = stability_distance(&u, &params, variant, 0.88, lam, &scheme()).unwrap();
            assert!(off > 0.0, "{variant}");
        }
    }

    #[test]
    fn zero_coefficient_gives_weighted_norm() {
        let params = thm1_family(3, 1.5);
        let u = bump_profile(0.5, 2.0, 1.0).unwrap();
        let d = stability_distance(&u, &params, StabilityVariant::Thm1Dist, 0.0, 1.0, &scheme()).unwrap();
        assert!(rel(d, half_power_norm(&u, &params, &scheme()).unwrap()) < 1e-12);
        let params = hydrogen(3);
        let d = stability_distance(&u, &params, StabilityVariant::Thm2Dist, 0.0, 1.0, &scheme()).unwrap();
        let m = weighted_norm(&u, false, 2.0, 0.0, 3, &scheme()).unwrap().value;
        assert!(rel(d, m) < 1e-12);
    }

    #[test]
    fn variant_preconditions() {
        let small = thm1_family(3, 1.5);
        let u = bump_profile(0.5, 2.0, 1.0).unwrap();
        assert!(stability_distance(&u, &small, StabilityVariant::Thm2Dist, 1.0, 1.0, &scheme()).is_err());
        assert!(stability_distance(&u, &small, StabilityVariant::Thm3Dist, 1.0, 2.0, &scheme()).is_err());
        assert!(stability_distance(&u, &hydrogen(3), StabilityVariant::Thm1Dist, 1.0, 1.0, &scheme()).is_err());
        assert!(stability_distance(&u, &hydrogen(3), StabilityVariant::Thm4Dist, 1.0, 0.5, &scheme()).is_err());
    }

    #[test]
    fn half_power_weight_collapses_under_hypothesis() {
        let params = thm1_family(3, 1.5);
        let (route, collapsed) = half_power_weight_exponents(&params);
        assert!((route - collapsed).abs() < 1e-12);
    }

    #[test]
    fn half_power_distance_dominated_by_lp_distance() {
        let params = thm1_family(3, 1.5);
        let e = extremal_profile(&params, 1.0, 1.0).unwrap();
        let u = perturbed(&e, 0.5, &bump_profile(0.5, 3.0, 1.0).unwrap());
        let v = extremal_profile(&params, 0.9, 1.3).unwrap();
        let half = distance_between(&u, &v, &params, DistanceKind::HalfPowerL2 { gamma: params.mass_weight() }, &scheme())
            .unwrap();
        let lp = distance_between(&u, &v, &params, DistanceKind::PowerLp { gamma: params.mass_weight() }, &scheme())
            .unwrap();
        assert!(half <= 4.0 * lp);
    }

    #[test]
    fn variant_names_round_trip() {
        for v in StabilityVariant::ALL {
            assert_eq!(v.name().parse::<StabilityVariant>().unwrap(), v);
        }
    }
}
