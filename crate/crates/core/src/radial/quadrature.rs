//! Adaptive Gauss–Legendre quadrature on log-spaced panels of `(0, ∞)`.

use serde::{Deserialize, Serialize};

use super::gauss::GaussLegendre;
use crate::error::{CknError, Result};

/// Panelization and tolerances for radial integrals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureScheme {
    /// Lower cutoff; `[0, r_min]` is handled by a power-law head correction.
    pub r_min: f64,
    /// Default upper truncation when no decay hint is available.
    pub r_max: f64,
    pub panels_per_decade: f64,
    pub nodes_per_panel: usize,
    pub rel_tol: f64,
    /// Maximum number of panel bisections.
    pub max_depth: u32,
    /// Hard ceiling for tail extension.
    pub tail_limit: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            r_min: 1e-30,
            r_max: 1e3,
            panels_per_decade: 2.0,
            nodes_per_panel: 32,
            rel_tol: 1e-11,
            max_depth: 40,
            tail_limit: 1e15,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CknError::Config(format!("quadrature scheme: {m}")));
        if !(self.r_min > 0.0) || !(self.r_max > self.r_min) {
            return bad("need 0 < r_min < r_max");
        }
        if !(self.panels_per_decade > 0.0) {
            return bad("panels_per_decade must be positive");
        }
        if self.nodes_per_panel < 2 {
            return bad("nodes_per_panel must be >= 2");
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return bad("rel_tol must lie in (0, 1)");
        }
        if !(self.tail_limit >= self.r_max) {
            return bad("tail_limit must be >= r_max");
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes_per_panel = nodes;
        self
    }

    /// Initial panel edges on `[r_min, r_max]`.
    pub fn panel_edges(&self) -> Vec<f64> {
        log_edges(self.r_min, self.r_max, self.panels_per_decade)
    }
}

/// Integration range. `lo <= 0` reaches the origin and `hi = ∞` is
/// unbounded. `tail_start` seeds the first truncation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub tail_start: Option<f64>,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, tail_start: None }
    }

    pub fn half_line() -> Self {
        Self::new(0.0, f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi > self.lo)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    /// Integral of `|g|`, the scale for relative tolerances.
    pub abs_value: f64,
    /// Sum of panel-level refinement differences.
    pub error_estimate: f64,
    /// Contribution of `[0, r_min]`.
    pub head: f64,
    /// Bound on the discarded tail beyond `upper`.
    pub tail_bound: f64,
    /// Where integration stopped.
    pub upper: f64,
    pub evaluations: usize,
}

impl Integral {
    fn absorb(&mut self, other: &Integral) {
        self.value += other.value;
        self.abs_value += other.abs_value;
        self.error_estimate += other.error_estimate;
        self.evaluations += other.evaluations;
        self.upper = self.upper.max(other.upper);
    }
}

/// Quadrature nodes and weights for a fixed domain, reused when the same
/// domain is integrated many times with different integrands.
#[derive(Debug, Clone, Default)]
pub struct NodeRule {
    pub r: Vec<f64>,
    pub w: Vec<f64>,
}

impl NodeRule {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.r.iter().zip(&self.w).map(|(&r, &w)| w * g(r)).sum()
    }
}

pub(crate) fn log_edges(lo: f64, hi: f64, per_decade: f64) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((per_decade * decades).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / count as f64);
    let mut edges: Vec<f64> = (0..=count).map(|k| lo * ratio.powi(k as i32)).collect();
    edges[0] = lo;
    edges[count] = hi;
    edges
}

struct Adaptive<'a, F> {
    g: &'a F,
    rule: &'a GaussLegendre,
    rel_tol: f64,
    max_depth: u32,
    floor_unit: f64,
    out: Integral,
    record: Option<&'a mut NodeRule>,
}

impl<F: Fn(f64) -> f64> Adaptive<'_, F> {
    fn panel(&mut self, a: f64, b: f64) -> Result<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let (mut s, mut s_abs) = (0.0, 0.0);
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let r = mid + half * x;
            let v = (self.g)(r);
            if !v.is_finite() {
                return Err(CknError::NonFiniteIntegrand { r });
            }
            s += w * v;
            s_abs += w * v.abs();
        }
        self.out.evaluations += self.rule.len();
        Ok((s * half, s_abs * half))
    }

    fn split_point(a: f64, b: f64) -> f64 {
        if a > 0.0 && b / a > 4.0 {
            (a * b).sqrt()
        } else {
            0.5 * (a + b)
        }
    }

    fn refine(&mut self, a: f64, b: f64, whole: (f64, f64), depth: u32) -> Result<()> {
        let m = Self::split_point(a, b);
        let left = self.panel(a, m)?;
        let right = self.panel(m, b)?;
        let fine = left.0 + right.0;
        let fine_abs = left.1 + right.1;
        let diff = (whole.0 - fine).abs();
        let floor = self.floor_unit / f64::powi(2.0, depth as i32);
        if diff <= self.rel_tol * fine_abs || diff <= floor {
            self.out.value += fine;
            self.out.abs_value += fine_abs;
            self.out.error_estimate += diff;
            if let Some(rec) = self.record.as_deref_mut() {
                for (lo, hi) in [(a, m), (m, b)] {
                    let half = 0.5 * (hi - lo);
                    let mid = 0.5 * (hi + lo);
                    for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                        rec.r.push(mid + half * x);
                        rec.w.push(w * half);
                    }
                }
            }
            return Ok(());
        }
        if depth >= self.max_depth {
            return Err(CknError::AccuracyNotReached { lo: a, hi: b, rel_tol: self.rel_tol, estimate: fine });
        }
        self.refine(a, m, left, depth + 1)?;
        self.refine(m, b, right, depth + 1)
    }
}

fn interval_impl<F: Fn(f64) -> f64>(
    g: &F,
    lo: f64,
    hi: f64,
    scheme: &QuadratureScheme,
    scale_hint: f64,
    record: Option<&mut NodeRule>,
) -> Result<Integral> {
    let mut out = Integral { upper: hi, ..Integral::default() };
    if !(hi > lo) {
        return Ok(out);
    }
    let rule = GaussLegendre::cached(scheme.nodes_per_panel);
    let edges = if lo > 0.0 { log_edges(lo, hi, scheme.panels_per_decade) } else { vec![lo, hi] };

    let mut ad = Adaptive { g, rule: &rule, rel_tol: scheme.rel_tol, max_depth: scheme.max_depth, floor_unit: 0.0, out, record };
    let mut coarse = Vec::with_capacity(edges.len() - 1);
    let mut scale = 0.0;
    for w in edges.windows(2) {
        let est = ad.panel(w[0], w[1])?;
        scale += est.1;
        coarse.push(est);
    }
    ad.floor_unit = scheme.rel_tol * scale.max(scale_hint) / coarse.len() as f64;
    for (w, est) in edges.windows(2).zip(coarse) {
        ad.refine(w[0], w[1], est, 0)?;
    }
    out = ad.out;
    out.upper = hi;
    Ok(out)
}

/// Adaptive estimate of `∫_{lo}^{hi} g` on log-spaced panels.
pub fn integrate_interval<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, scheme: &QuadratureScheme) -> Result<Integral> {
    interval_impl(g, lo, hi, scheme, 0.0, None)
}

/// `∫_{r_min}^{r_max} g` with the scheme's own truncation.
pub fn integrate<F: Fn(f64) -> f64>(g: &F, scheme: &QuadratureScheme) -> Result<f64> {
    Ok(integrate_interval(g, scheme.r_min, scheme.r_max, scheme)?.value)
}

/// Estimates `∫_0^{r_min} g` assuming `g ~ C r^α` near the origin.
pub fn head_correction<F: Fn(f64) -> f64>(g: &F, r_min: f64) -> Result<f64> {
    let g0 = g(r_min);
    let g1 = g(2.0 * r_min);
    if !g0.is_finite() {
        return Err(CknError::NonFiniteIntegrand { r: r_min });
    }
    if !g1.is_finite() {
        return Err(CknError::NonFiniteIntegrand { r: 2.0 * r_min });
    }
    if g0 == 0.0 {
        return Ok(0.0);
    }
    if g1 == 0.0 || g1.signum() != g0.signum() {
        return Ok(g0 * r_min);
    }
    let alpha = (g1 / g0).log2();
    if alpha <= -1.0 + 1e-9 {
        return Err(CknError::Integrability(format!(
            "integrand behaves like r^{alpha:.4} near the origin"
        )));
    }
    Ok(g0 * r_min / (alpha + 1.0))
}

/// Bound on `∫_R^∞ |g|` from the local log-slope at `R`.
///
/// Valid when `ln|g|` is concave in `ln r` beyond `R`, which holds for
/// power times stretched-exponential envelopes. Returns `∞` when the
/// integrand is not yet decaying faster than `1/r`.
pub fn tail_bound<F: Fn(f64) -> f64>(g: &F, r: f64) -> f64 {
    let h = 0.99;
    let v1 = g(r).abs();
    let v0 = g(r * h).abs();
    if !(v1.is_finite() && v0.is_finite()) {
        return f64::INFINITY;
    }
    if v1 == 0.0 {
        let v2 = g(2.0 * r).abs();
        return if v0 == 0.0 && v2 == 0.0 { 0.0 } else { f64::INFINITY };
    }
    if v0 == 0.0 {
        return f64::INFINITY;
    }
    let slope = (v1 / v0).ln() / (1.0 / h).ln();
    if slope < -1.5 {
        v1 * r / (-slope - 1.0)
    } else {
        f64::INFINITY
    }
}

fn domain_impl<F: Fn(f64) -> f64>(
    g: &F,
    domain: Domain,
    scheme: &QuadratureScheme,
    mut record: Option<&mut NodeRule>,
) -> Result<Integral> {
    let from_origin = domain.lo <= 0.0;
    let lo = if from_origin { scheme.r_min } else { domain.lo };
    let head = if from_origin { head_correction(g, scheme.r_min)? } else { 0.0 };

    if domain.hi.is_finite() {
        let mut out = interval_impl(g, lo, domain.hi, scheme, 0.0, record)?;
        out.head = head;
        out.value += head;
        out.abs_value += head.abs();
        return Ok(out);
    }

    let mut upper = domain.tail_start.unwrap_or(scheme.r_max).max(2.0 * lo).min(scheme.tail_limit);
    let mut out = interval_impl(g, lo, upper, scheme, 0.0, record.as_deref_mut())?;
    loop {
        let bound = tail_bound(g, upper);
        let scale = out.abs_value + head.abs();
        if bound <= scheme.rel_tol * scale || (bound == 0.0 && scale == 0.0) {
            out.tail_bound = bound;
            break;
        }
        if upper >= scheme.tail_limit {
            return Err(CknError::AccuracyNotReached {
                lo,
                hi: upper,
                rel_tol: scheme.rel_tol,
                estimate: out.value,
            });
        }
        let next = (upper * 4.0).min(scheme.tail_limit);
        let piece = interval_impl(g, upper, next, scheme, out.abs_value, record.as_deref_mut())?;
        out.absorb(&piece);
        upper = next;
    }
    out.upper = upper;
    out.head = head;
    out.value += head;
    out.abs_value += head.abs();
    Ok(out)
}

/// Integrates over a [`Domain`] with head correction at the origin and
/// adaptive tail extension for unbounded domains.
pub fn integrate_domain<F: Fn(f64) -> f64>(g: &F, domain: Domain, scheme: &QuadratureScheme) -> Result<Integral> {
    domain_impl(g, domain, scheme, None)
}

/// Builds a reusable rule adapted to `envelope` on `domain`.
///
/// The rule omits the head interval `[0, r_min]`.
pub fn adapted_rule<F: Fn(f64) -> f64>(envelope: &F, domain: Domain, scheme: &QuadratureScheme) -> Result<NodeRule> {
    let mut rule = NodeRule::default();
    let shifted = |r: f64| envelope(r);
    let mut probe = domain;
    if probe.lo <= 0.0 {
        // skip the head correction for rules; keep the panel start at r_min
        probe.lo = scheme.r_min;
    }
    domain_impl(&shifted, probe, scheme, Some(&mut rule))?;
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn linear_on_unit_interval() {
        let s = QuadratureScheme::default();
        let v = integrate_domain(&|r: f64| r, Domain::new(0.0, 1.0), &s).unwrap();
        assert!(rel(v.value, 0.5) < 1e-12, "{}", v.value);
    }

    #[test]
    fn gamma_three() {
        let s = QuadratureScheme::default();
        let v = integrate_domain(&|r: f64| r * r * (-r).exp(), Domain::half_line(), &s).unwrap();
        assert!(rel(v.value, 2.0) < 1e-10, "{}", v.value);
        assert!(v.tail_bound <= 1e-11 * 2.0);
    }

    #[test]
    fn inverse_sqrt_with_cutoff() {
        let s = QuadratureScheme::default();
        let v = integrate_interval(&|r: f64| r.powf(-0.5), 1e-8, 1.0, &s).unwrap();
        assert!(rel(v.value, 2.0 * (1.0 - 1e-4)) < 1e-10, "{}", v.value);
    }

    #[test]
    fn head_correction_recovers_singular_mass() {
        let s = QuadratureScheme::default();
        // ∫_0^1 r^{-1/3} dr = 3/2
        let v = integrate_domain(&|r: f64| r.powf(-1.0 / 3.0), Domain::new(0.0, 1.0), &s).unwrap();
        assert!(rel(v.value, 1.5) < 1e-11, "{}", v.value);
        assert!(v.head > 0.0);
    }

    #[test]
    fn non_integrable_origin_is_rejected() {
        let s = QuadratureScheme::default();
        let e = integrate_domain(&|r: f64| 1.0 / r, Domain::new(0.0, 1.0), &s).unwrap_err();
        assert!(matches!(e, CknError::Integrability(_)));
    }

    #[test]
    fn nan_is_reported() {
        let s = QuadratureScheme::default();
        let e = integrate_interval(&|r: f64| if r > 0.5 { f64::NAN } else { r }, 0.1, 1.0, &s).unwrap_err();
        assert!(matches!(e, CknError::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn depth_cap_raises_accuracy_error() {
        let s = QuadratureScheme { max_depth: 2, ..QuadratureScheme::default() };
        let e = integrate_interval(&|r: f64| (r - 0.5).abs().sqrt(), 0.0, 1.0, &s).unwrap_err();
        assert!(matches!(e, CknError::AccuracyNotReached { .. }));
    }

    #[test]
    fn slow_tail_is_rejected_at_limit() {
        let s = QuadratureScheme { tail_limit: 1e6, ..QuadratureScheme::default() };
        let e = integrate_domain(&|r: f64| 1.0 / (1.0 + r), Domain::half_line(), &s).unwrap_err();
        assert!(matches!(e, CknError::AccuracyNotReached { .. }));
    }

    #[test]
    fn tail_bound_dominates_doubling_change() {
        let s = QuadratureScheme::default();
        let g = |r: f64| r.powi(3) * (-(r.sqrt())).exp();
        for upper in [50.0, 200.0, 800.0] {
            let bound = tail_bound(&g, upper);
            let change = integrate_interval(&g, upper, 2.0 * upper, &s).unwrap().value;
            assert!(bound >= change, "R={upper} bound={bound} change={change}");
        }
    }

    #[test]
    fn rule_reproduces_adaptive_value() {
        let s = QuadratureScheme::default();
        let g = |r: f64| r * r * (-r).exp();
        let rule = adapted_rule(&g, Domain::half_line(), &s).unwrap();
        assert!(rel(rule.apply(g), 2.0) < 1e-10);
    }

    #[test]
    fn panel_edges_cover_range() {
        let s = QuadratureScheme::default();
        let e = s.panel_edges();
        assert_eq!(e[0], s.r_min);
        assert_eq!(*e.last().unwrap(), s.r_max);
        assert!(e.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(e.len() - 1, 66);
    }
}
