//! Radial profiles `f(r)` with analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::params::CknParams;

/// Decay class of a profile at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Decay {
    Compact,
    /// `|f| <~ exp(-rate · r^exponent)`.
    StretchedExp { rate: f64, exponent: f64 },
    None,
}

impl Decay {
    /// Decay of `|f|^q`.
    pub fn powered(self, q: f64) -> Decay {
        match self {
            Decay::StretchedExp { rate, exponent } => Decay::StretchedExp { rate: rate * q, exponent },
            other => other,
        }
    }

    /// The slower of two decays.
    pub fn slower(self, other: Decay) -> Decay {
        match (self, other) {
            (Decay::None, _) | (_, Decay::None) => Decay::None,
            (Decay::Compact, d) | (d, Decay::Compact) => d,
            (Decay::StretchedExp { rate: r1, exponent: e1 }, Decay::StretchedExp { rate: r2, exponent: e2 }) => {
                if e1 < e2 || (e1 == e2 && r1 < r2) {
                    self
                } else {
                    other
                }
            }
        }
    }

    /// Radius beyond which `exp(-rate r^θ)` is below `e^{-40}`.
    pub fn tail_start(self) -> Option<f64> {
        match self {
            Decay::StretchedExp { rate, exponent } if rate > 0.0 && exponent > 0.0 => {
                Some((40.0 / rate).powf(1.0 / exponent))
            }
            _ => None,
        }
    }
}

/// Shape tree of a radial profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Zero,
    Constant {
        value: f64,
    },
    /// `coeff · r^exponent`
    Power {
        coeff: f64,
        exponent: f64,
    },
    /// `amplitude · exp(-1/((r-r0)(r1-r)))` on `(r0, r1)`
    Bump {
        r0: f64,
        r1: f64,
        amplitude: f64,
    },
    /// `c · exp(-r^s / (s lam^s))`
    Extremal {
        c: f64,
        lam: f64,
        s: f64,
    },
    /// `alpha · r^power · exp(beta r^s / s)`
    ExtremalQ {
        alpha: f64,
        beta: f64,
        power: f64,
        s: f64,
    },
    /// `base · (1 + eps · bump)`
    Perturbed {
        base: Box<Shape>,
        eps: f64,
        bump: Box<Shape>,
    },
    /// `factor · inner(lam · r)`
    Scaled {
        inner: Box<Shape>,
        factor: f64,
        lam: f64,
    },
    /// `sign(f) |f|^{p/2}`
    HalfPower {
        inner: Box<Shape>,
        p: f64,
    },
    /// `inner · χ(r)` with a smooth cutoff supported in `[r_lo, r_hi]`
    Truncated {
        inner: Box<Shape>,
        r_lo: f64,
        r_hi: f64,
    },
    Sum {
        terms: Vec<Shape>,
    },
}

/// Smooth step `S(t)`: 0 for `t <= 0`, 1 for `t >= 1`. Returns `(S, S')`.
fn smooth_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    let s = a / (a + b);
    let ds = a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / ((a + b) * (a + b));
    (s, ds)
}

impl Shape {
    pub fn value(&self, r: f64) -> f64 {
        self.eval2(r).0
    }

    pub fn deriv(&self, r: f64) -> f64 {
        self.eval2(r).1
    }

    /// `(f(r), f'(r))`.
    pub fn eval2(&self, r: f64) -> (f64, f64) {
        match self {
            Shape::Zero => (0.0, 0.0),
            Shape::Constant { value } => (*value, 0.0),
            Shape::Power { coeff, exponent } => {
                let v = coeff * r.powf(*exponent);
                let d = if *exponent == 0.0 { 0.0 } else { coeff * exponent * r.powf(exponent - 1.0) };
                (v, d)
            }
            Shape::Bump { r0, r1, amplitude } => {
                if r <= *r0 || r >= *r1 {
                    return (0.0, 0.0);
                }
                // q = 1 - x² with x the position rescaled to [-1, 1]
                let h2 = 0.25 * (r1 - r0) * (r1 - r0);
                let q = (r - r0) * (r1 - r) / h2;
                let v = amplitude * (-1.0 / q).exp();
                if v == 0.0 {
                    return (0.0, 0.0);
                }
                let dq = (r1 + r0 - 2.0 * r) / h2;
                (v, v * dq / (q * q))
            }
            Shape::Extremal { c, lam, s } => {
                if *c == 0.0 {
                    return (0.0, 0.0);
                }
                let rs = r.powf(*s);
                let ls = lam.powf(*s);
                let v = c * (-rs / (s * ls)).exp();
                (v, -v * rs / (r * ls))
            }
            Shape::ExtremalQ { alpha, beta, power, s } => {
                if *alpha == 0.0 {
                    return (0.0, 0.0);
                }
                let rs = r.powf(*s);
                let v = alpha * r.powf(*power) * (beta * rs / s).exp();
                (v, v * (power + beta * rs) / r)
            }
            Shape::Perturbed { base, eps, bump } => {
                let (b, db) = base.eval2(r);
                let (m, dm) = bump.eval2(r);
                (b * (1.0 + eps * m), db * (1.0 + eps * m) + b * eps * dm)
            }
            Shape::Scaled { inner, factor, lam } => {
                let (v, d) = inner.eval2(lam * r);
                (factor * v, factor * lam * d)
            }
            Shape::HalfPower { inner, p } => {
                let (f, df) = inner.eval2(r);
                if f == 0.0 {
                    return (0.0, 0.0);
                }
                let m = f.abs().powf(0.5 * (p - 2.0));
                (m * f, 0.5 * p * m * df)
            }
            Shape::Truncated { inner, r_lo, r_hi } => {
                if r <= *r_lo || r >= *r_hi {
                    return (0.0, 0.0);
                }
                let (up, dup) = smooth_step((r - r_lo) / r_lo);
                let (down, ddown) = smooth_step((r_hi - r) / (0.5 * r_hi));
                let chi = up * down;
                let dchi = dup / r_lo * down - up * ddown / (0.5 * r_hi);
                let (f, df) = inner.eval2(r);
                (f * chi, df * chi + f * dchi)
            }
            Shape::Sum { terms } => terms.iter().fold((0.0, 0.0), |(v, d), t| {
                let (tv, td) = t.eval2(r);
                (v + tv, d + td)
            }),
        }
    }

    /// Closed support `[lo, hi]`; `lo = 0` reaches the origin, `hi = ∞` is
    /// unbounded. The zero profile reports the empty interval `[0, 0]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Shape::Zero => (0.0, 0.0),
            Shape::Constant { value } if *value == 0.0 => (0.0, 0.0),
            Shape::Power { coeff, .. } if *coeff == 0.0 => (0.0, 0.0),
            Shape::Extremal { c, .. } if *c == 0.0 => (0.0, 0.0),
            Shape::ExtremalQ { alpha, .. } if *alpha == 0.0 => (0.0, 0.0),
            Shape::Constant { .. } | Shape::Power { .. } | Shape::Extremal { .. } | Shape::ExtremalQ { .. } => {
                (0.0, f64::INFINITY)
            }
            Shape::Bump { r0, r1, amplitude } => {
                if *amplitude == 0.0 {
                    (0.0, 0.0)
                } else {
                    (*r0, *r1)
                }
            }
            Shape::Perturbed { base, .. } => base.support(),
            Shape::Scaled { inner, factor, lam } => {
                if *factor == 0.0 {
                    return (0.0, 0.0);
                }
                let (lo, hi) = inner.support();
                (lo / lam, hi / lam)
            }
            Shape::HalfPower { inner, .. } => inner.support(),
            Shape::Truncated { inner, r_lo, r_hi } => {
                let (lo, hi) = inner.support();
                let (lo, hi) = (lo.max(*r_lo), hi.min(*r_hi));
                if hi > lo {
                    (lo, hi)
                } else {
                    (0.0, 0.0)
                }
            }
            Shape::Sum { terms } => {
                let parts: Vec<(f64, f64)> = terms.iter().map(|t| t.support()).filter(|(lo, hi)| hi > lo).collect();
                if parts.is_empty() {
                    return (0.0, 0.0);
                }
                let lo = parts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = parts.iter().map(|p| p.1).fold(0.0, f64::max);
                (lo, hi)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        let (lo, hi) = self.support();
        !(hi > lo)
    }

    pub fn decay(&self) -> Decay {
        if self.is_zero() {
            return Decay::Compact;
        }
        if self.support().1.is_finite() {
            return Decay::Compact;
        }
        match self {
            Shape::Zero | Shape::Bump { .. } | Shape::Truncated { .. } => Decay::Compact,
            Shape::Constant { .. } | Shape::Power { .. } => Decay::None,
            Shape::Extremal { lam, s, .. } => {
                if *s > 0.0 {
                    Decay::StretchedExp { rate: 1.0 / (s * lam.powf(*s)), exponent: *s }
                } else {
                    Decay::None
                }
            }
            Shape::ExtremalQ { beta, s, .. } => {
                if beta / s < 0.0 && *s > 0.0 {
                    Decay::StretchedExp { rate: -beta / s, exponent: *s }
                } else {
                    Decay::None
                }
            }
            Shape::Perturbed { base, .. } => base.decay(),
            Shape::Scaled { inner, lam, .. } => match inner.decay() {
                Decay::StretchedExp { rate, exponent } => Decay::StretchedExp { rate: rate * lam.powf(exponent), exponent },
                d => d,
            },
            Shape::HalfPower { inner, p } => inner.decay().powered(0.5 * p),
            Shape::Sum { terms } => terms.iter().map(|t| t.decay()).fold(Decay::Compact, Decay::slower),
        }
    }

    /// Exponents `(k, k')` with `|f| ~ r^k` and `|f'| ~ r^{k'}` as `r → 0`.
    /// `None` when the profile vanishes near the origin; `k' = ∞` when the
    /// derivative vanishes identically there.
    pub fn origin_orders(&self) -> Option<(f64, f64)> {
        if self.is_zero() || self.support().0 > 0.0 {
            return None;
        }
        match self {
            Shape::Zero | Shape::Bump { .. } | Shape::Truncated { .. } => None,
            Shape::Constant { .. } => Some((0.0, f64::INFINITY)),
            Shape::Power { exponent, .. } => {
                Some((*exponent, if *exponent == 0.0 { f64::INFINITY } else { exponent - 1.0 }))
            }
            Shape::Extremal { s, .. } => Some((0.0, s - 1.0)),
            Shape::ExtremalQ { power, s, .. } => {
                let d = if *power == 0.0 { s - 1.0 } else { (power - 1.0).min(power + s - 1.0) };
                Some((*power, d))
            }
            Shape::Perturbed { base, bump, .. } => {
                let (k, dk) = base.origin_orders()?;
                match bump.origin_orders() {
                    None => Some((k, dk)),
                    Some((m, dm)) => Some((k + m.min(0.0), dk.min(k + dm).min(dk + m.min(0.0)))),
                }
            }
            Shape::Scaled { inner, .. } => inner.origin_orders(),
            Shape::HalfPower { inner, p } => {
                let (k, dk) = inner.origin_orders()?;
                Some((0.5 * p * k, 0.5 * (p - 2.0) * k + dk))
            }
            Shape::Sum { terms } => terms.iter().filter_map(|t| t.origin_orders()).fold(None, |acc, (k, dk)| match acc {
                None => Some((k, dk)),
                Some((a, da)) => Some((a.min(k), da.min(dk))),
            }),
        }
    }
}

/// A labelled radial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default)]
    pub label: String,
}

impl RadialProfile {
    pub fn new(shape: Shape, label: impl Into<String>) -> Self {
        Self { shape, label: label.into() }
    }

    pub fn zero() -> Self {
        Self::new(Shape::Zero, "zero")
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.shape.value(r)
    }

    pub fn deriv(&self, r: f64) -> f64 {
        self.shape.deriv(r)
    }

    pub fn eval2(&self, r: f64) -> (f64, f64) {
        self.shape.eval2(r)
    }

    pub fn support(&self) -> (f64, f64) {
        self.shape.support()
    }

    pub fn decay(&self) -> Decay {
        self.shape.decay()
    }

    pub fn is_zero(&self) -> bool {
        self.shape.is_zero()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `factor · f`.
    pub fn times(&self, factor: f64) -> RadialProfile {
        RadialProfile::new(
            Shape::Scaled { inner: Box::new(self.shape.clone()), factor, lam: 1.0 },
            format!("{}*{factor}", self.label),
        )
    }

    /// `f + other`.
    pub fn plus(&self, other: &RadialProfile) -> RadialProfile {
        RadialProfile::new(
            Shape::Sum { terms: vec![self.shape.clone(), other.shape.clone()] },
            format!("{}+{}", self.label, other.label),
        )
    }
}

/// The standard mollifier bump on `(r0, r1)`.
pub fn bump_profile(r0: f64, r1: f64, amplitude: f64) -> Result<RadialProfile> {
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(CknError::InvalidArgument(format!("bump needs 0 < r0 < r1, got [{r0}, {r1}]")));
    }
    Ok(RadialProfile::new(Shape::Bump { r0, r1, amplitude }, format!("bump[{r0},{r1}]x{amplitude}")))
}

/// `c · exp(-r^s / (s lam^s))` with `s = b - a + 1`.
pub fn extremal_profile(params: &CknParams, c: f64, lam: f64) -> Result<RadialProfile> {
    let s = params.manifold_exponent();
    if !(s > 0.0) {
        return Err(CknError::InvalidArgument(format!("extremal needs b - a + 1 > 0, got {s}")));
    }
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(CknError::InvalidArgument(format!("extremal needs lam > 0, got {lam}")));
    }
    if c == 0.0 {
        return Ok(RadialProfile::zero());
    }
    Ok(RadialProfile::new(Shape::Extremal { c, lam, s }, format!("extremal(c={c},lam={lam})")))
}

/// `alpha · r^{2(b+1)-N} · exp(beta r^{b-a+1} / (b-a+1))`.
pub fn extremal_profile_q(n: u32, a: f64, b: f64, alpha: f64, beta: f64) -> Result<RadialProfile> {
    let s = b - a + 1.0;
    if s == 0.0 {
        return Err(CknError::InvalidArgument("b = a - 1 has no Q-extremal".into()));
    }
    if alpha == 0.0 {
        return Ok(RadialProfile::zero());
    }
    let power = 2.0 * (b + 1.0) - n as f64;
    Ok(RadialProfile::new(
        Shape::ExtremalQ { alpha, beta, power, s },
        format!("extremal_q(alpha={alpha},beta={beta})"),
    ))
}

/// Warns when `beta` has the wrong sign for the Q-region of `(a, b)`.
pub fn q_extremal_sign_warning(n: u32, a: f64, b: f64, beta: f64) -> Option<String> {
    use crate::params::{classify_region, Region};
    match classify_region(n, a, b) {
        Region::Q1 if beta <= 0.0 => Some(format!("Q1 extremals need beta > 0, got {beta}")),
        Region::Q2 if beta >= 0.0 => Some(format!("Q2 extremals need beta < 0, got {beta}")),
        Region::Q1 | Region::Q2 => None,
        other => Some(format!("({a}, {b}) lies in {other}, not in Q")),
    }
}

/// `sign(f)|f|^{p/2}`.
pub fn half_power_transform(u: &RadialProfile, p: f64) -> Result<RadialProfile> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(CknError::InvalidArgument(format!("half-power transform needs 1 < p <= 2, got {p}")));
    }
    if p == 2.0 {
        return Ok(u.clone());
    }
    if u.is_zero() {
        return Ok(RadialProfile::zero());
    }
    Ok(RadialProfile::new(
        Shape::HalfPower { inner: Box::new(u.shape.clone()), p },
        format!("H_{p}({})", u.label),
    ))
}

/// `factor · f(lam · r)`.
pub fn dilate(u: &RadialProfile, factor: f64, lam: f64) -> Result<RadialProfile> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(CknError::InvalidArgument(format!("dilation needs lam > 0, got {lam}")));
    }
    Ok(RadialProfile::new(
        Shape::Scaled { inner: Box::new(u.shape.clone()), factor, lam },
        format!("{}@{lam}", u.label),
    ))
}

/// Smoothly truncates `u` to `[r_lo, r_hi]`.
pub fn smooth_truncation(u: &RadialProfile, r_lo: f64, r_hi: f64) -> Result<RadialProfile> {
    if !(r_lo > 0.0 && r_hi > 4.0 * r_lo && r_hi.is_finite()) {
        return Err(CknError::InvalidArgument(format!("truncation needs 0 < 4 r_lo < r_hi < ∞, got [{r_lo}, {r_hi}]")));
    }
    Ok(RadialProfile::new(
        Shape::Truncated { inner: Box::new(u.shape.clone()), r_lo, r_hi },
        format!("{}|[{r_lo},{r_hi}]", u.label),
    ))
}

/// `base · (1 + eps · bump)`.
pub fn perturbed(base: &RadialProfile, eps: f64, bump: &RadialProfile) -> RadialProfile {
    RadialProfile::new(
        Shape::Perturbed { base: Box::new(base.shape.clone()), eps, bump: Box::new(bump.shape.clone()) },
        format!("{}*(1+{eps}*{})", base.label, bump.label),
    )
}
