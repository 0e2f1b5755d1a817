//! Projection onto the extremal family `c · exp(-r^s/(s λ^s))`, the
//! mixed-term-preserving dilation and the scaling counterexample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::functionals::{ckn_terms, deficit_si_detailed, distance_between, DistanceKind, StabilityVariant};
use crate::optimize::{golden_section, minimize_convex};
use crate::params::{require_hypotheses, CknParams, TheoremId};
use crate::radial::{
    adapted_rule, bump_profile, dilate, extremal_profile, profile_domain, union_domain, QuadratureScheme,
    RadialProfile,
};
use crate::vectorineq::half_power;

/// How the inner minimization over `c` is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    /// Closed form when the objective is quadratic, convex search otherwise.
    #[default]
    Auto,
    /// Always golden-section on a bracket.
    Golden,
}

/// Optimizer settings for [`project`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptConfig {
    /// `λ` window as multiples of the natural scale.
    pub lam_window: (f64, f64),
    pub grid_points: usize,
    /// Tolerance in `ln λ` for the outer refinement and in `c` for the inner one.
    pub tol: f64,
    pub max_iter: usize,
    pub inner: InnerSolver,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { lam_window: (1e-3, 1e3), grid_points: 61, tol: 1e-9, max_iter: 200, inner: InnerSolver::Auto }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.lam_window;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(CknError::Config(format!("lam_window must satisfy 0 < lo < hi, got ({lo}, {hi})")));
        }
        if self.grid_points < 3 {
            return Err(CknError::Config("grid_points must be >= 3".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CknError::Config("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Minimizer of a distance over the extremal family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub c_star: f64,
    pub lam_star: f64,
    pub distance: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// The best grid point sat on the edge of the `λ` window.
    pub boundary_hit: bool,
    /// `None` for projections in a bare [`DistanceKind`].
    pub variant: Option<StabilityVariant>,
}

/// Node values of `u`, the unit extremal `e_λ` and both weights.
struct Sampled {
    wm: Vec<f64>,
    wg: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    e: Vec<f64>,
    de: Vec<f64>,
}

impl Sampled {
    fn build(
        u: &RadialProfile,
        params: &CknParams,
        kind: DistanceKind,
        lam: f64,
        scheme: &QuadratureScheme,
    ) -> Result<Self> {
        let p = params.p;
        let e = extremal_profile(params, 1.0, lam)?;
        let (gm, gg) = kind.gammas();
        let em = params.dim() - 1.0 - gm;
        let eg = params.dim() - 1.0 - gg;
        let (mass, grad) = (kind.uses_mass(), kind.uses_grad());
        let envelope = |r: f64| {
            let (f, df) = u.eval2(r);
            let (h, dh) = e.eval2(r);
            let mut s = 0.0;
            if mass {
                s += (f.abs().powf(p) + h.abs().powf(p)) * r.powf(em);
            }
            if grad {
                s += (df.abs().powf(p) + dh.abs().powf(p)) * r.powf(eg);
            }
            s
        };
        let domain = union_domain(&[profile_domain(u, p), profile_domain(&e, p)]);
        let rule = adapted_rule(&envelope, domain, scheme)?;
        let omega = crate::radial::sphere_area(params.n);
        let mut out = Sampled {
            wm: Vec::with_capacity(rule.len()),
            wg: Vec::with_capacity(rule.len()),
            u: Vec::with_capacity(rule.len()),
            du: Vec::with_capacity(rule.len()),
            e: Vec::with_capacity(rule.len()),
            de: Vec::with_capacity(rule.len()),
        };
        for (&r, &w) in rule.r.iter().zip(&rule.w) {
            let (f, df) = u.eval2(r);
            let (h, dh) = e.eval2(r);
            out.wm.push(if mass { omega * w * r.powf(em) } else { 0.0 });
            out.wg.push(if grad { omega * w * r.powf(eg) } else { 0.0 });
            out.u.push(f);
            out.du.push(df);
            out.e.push(h);
            out.de.push(dh);
        }
        Ok(out)
    }

    fn objective(&self, kind: DistanceKind, p: f64, c: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.u.len() {
            let (m, d) = kind.parts(p, (self.u[i], self.du[i]), (c * self.e[i], c * self.de[i]));
            s += self.wm[i] * m + self.wg[i] * d;
        }
        s
    }

    /// `d/dc` of [`Self::objective`] for the `|·|^p` kinds.
    fn derivative(&self, p: f64, c: f64) -> f64 {
        let dpow = |x: f64| if x == 0.0 { 0.0 } else { p * x.abs().powf(p - 1.0) * x.signum() };
        let mut s = 0.0;
        for i in 0..self.u.len() {
            if self.wm[i] != 0.0 {
                s -= self.wm[i] * dpow(self.u[i] - c * self.e[i]) * self.e[i];
            }
            if self.wg[i] != 0.0 {
                s -= self.wg[i] * dpow(self.du[i] - c * self.de[i]) * self.de[i];
            }
        }
        s
    }

    /// Least-squares coefficient, exact for quadratic objectives and a
    /// starting point otherwise.
    fn linear_projection(&self, kind: DistanceKind, p: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..self.u.len() {
            match kind {
                DistanceKind::HalfPowerL2 { .. } => {
                    let h = self.e[i].abs().powf(p / 2.0);
                    num += self.wm[i] * half_power(self.u[i], p) * h;
                    den += self.wm[i] * h * h;
                }
                _ => {
                    num += self.wm[i] * self.u[i] * self.e[i] + self.wg[i] * self.du[i] * self.de[i];
                    den += self.wm[i] * self.e[i] * self.e[i] + self.wg[i] * self.de[i] * self.de[i];
                }
            }
        }
        if den > 0.0 {
            let d = num / den;
            match kind {
                // d = H(c), so c = sign(d)|d|^{2/p}
                DistanceKind::HalfPowerL2 { .. } => d.signum() * d.abs().powf(2.0 / p),
                _ => d,
            }
        } else {
            0.0
        }
    }

    fn scale(&self) -> f64 {
        self.u.iter().chain(&self.e).fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

#[derive(Debug, Clone, Copy)]
struct InnerMin {
    c: f64,
    value: f64,
    evaluations: usize,
    converged: bool,
}

fn minimize_c(s: &Sampled, kind: DistanceKind, p: f64, cfg: &OptConfig) -> InnerMin {
    let c0 = s.linear_projection(kind, p);
    let quadratic = matches!(kind, DistanceKind::HalfPowerL2 { .. }) || p == 2.0;
    if quadratic && cfg.inner == InnerSolver::Auto {
        return InnerMin { c: c0, value: s.objective(kind, p, c0), evaluations: 1, converged: true };
    }
    let step = 0.1 * c0.abs().max(1e-3 * s.scale()).max(f64::MIN_POSITIVE);
    let f = |c: f64| s.objective(kind, p, c);
    let found = if cfg.inner == InnerSolver::Auto {
        minimize_convex(f, Some(|c: f64| s.derivative(p, c)), c0, step, cfg.tol)
    } else {
        minimize_convex(f, None::<fn(f64) -> f64>, c0, step, cfg.tol)
    };
    match found {
        Some(m) => InnerMin { c: m.x, value: m.fx, evaluations: m.evaluations, converged: m.converged },
        None => InnerMin { c: c0, value: s.objective(kind, p, c0), evaluations: 1, converged: false },
    }
}

fn inner_at(
    u: &RadialProfile,
    params: &CknParams,
    kind: DistanceKind,
    lam: f64,
    scheme: &QuadratureScheme,
    cfg: &OptConfig,
) -> Result<InnerMin> {
    let s = Sampled::build(u, params, kind, lam, scheme)?;
    Ok(minimize_c(&s, kind, params.p, cfg))
}

/// `(M/G)^{1/(p s)}` for the unit extremal ratio, or `1` when a term is
/// unavailable.
fn natural_scale(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> f64 {
    let p = params.p;
    let s = params.manifold_exponent();
    let Ok(tu) = ckn_terms(u, params, scheme) else {
        return 1.0;
    };
    let Ok(e) = extremal_profile(params, 1.0, 1.0) else {
        return 1.0;
    };
    let Ok(te) = ckn_terms(&e, params, scheme) else {
        return 1.0;
    };
    // M/G of e_λ scales as λ^{ps}; match it to u
    let target = tu.mass / tu.grad;
    let unit = te.mass / te.grad;
    let lam = (target / unit).powf(1.0 / (p * s));
    if lam.is_finite() && lam > 0.0 {
        lam
    } else {
        1.0
    }
}

/// Minimizes `kind(u, c·e_λ)` over `c` and, unless `pinned_lam` is given,
/// over `λ`.
pub fn project_kind(
    u: &RadialProfile,
    params: &CknParams,
    kind: DistanceKind,
    pinned_lam: Option<f64>,
    scheme: &QuadratureScheme,
    cfg: &OptConfig,
) -> Result<ProjectionResult> {
    params.validate()?;
    cfg.validate()?;
    if u.is_zero() {
        return Err(CknError::ZeroFunction);
    }
    let finish = |c: f64, lam: f64, evaluations: usize, converged: bool, boundary_hit: bool| {
        let v = extremal_profile(params, c, lam)?;
        let distance = distance_between(u, &v, params, kind, scheme)?;
        Ok(ProjectionResult { c_star: c, lam_star: lam, distance, evaluations, converged, boundary_hit, variant: None })
    };

    if let Some(lam) = pinned_lam {
        let m = inner_at(u, params, kind, lam, scheme, cfg)?;
        return finish(m.c, lam, m.evaluations, m.converged, false);
    }

    let center = natural_scale(u, params, scheme);
    let (lo, hi) = (center * cfg.lam_window.0, center * cfg.lam_window.1);
    let n = cfg.grid_points;
    let step = (hi / lo).ln() / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo.ln() + step * i as f64).collect();
    let probes: Vec<Result<InnerMin>> =
        grid.par_iter().map(|&t| inner_at(u, params, kind, t.exp(), scheme, cfg)).collect();
    let probes = probes.into_iter().collect::<Result<Vec<_>>>()?;
    let mut evaluations: usize = probes.iter().map(|m| m.evaluations).sum();
    let mut inner_ok = probes.iter().all(|m| m.converged);
    let best = (0..n).min_by(|&i, &j| probes[i].value.total_cmp(&probes[j].value)).unwrap_or(0);
    let boundary_hit = best == 0 || best == n - 1;

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n - 1)];
    let mut failure = None;
    let refined = golden_section(
        |t| match inner_at(u, params, kind, t.exp(), scheme, cfg) {
            Ok(m) => {
                inner_ok &= m.converged;
                evaluations += m.evaluations;
                m.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        cfg.tol,
        cfg.max_iter,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (lam, c) = if refined.fx <= probes[best].value {
        let lam = refined.x.exp();
        (lam, inner_at(u, params, kind, lam, scheme, cfg)?.c)
    } else {
        (grid[best].exp(), probes[best].c)
    };
    finish(c, lam, evaluations, refined.converged && inner_ok, boundary_hit)
}

/// Projects `u` onto the extremal family in the variant's distance.
pub fn project(
    u: &RadialProfile,
    params: &CknParams,
    variant: StabilityVariant,
    scheme: &QuadratureScheme,
    cfg: &OptConfig,
) -> Result<ProjectionResult> {
    variant.check(params, 1.0)?;
    let pinned = variant.lambda_pinned().then_some(1.0);
    let mut out = project_kind(u, params, variant.kind(params), pinned, scheme, cfg)?;
    out.variant = Some(variant);
    Ok(out)
}

/// `λ^κ u(λ r)` with `κ = (N-(p-1)a-b-1)/p`, which keeps the mixed term.
pub fn scale_transform(u: &RadialProfile, params: &CknParams, lam: f64) -> Result<RadialProfile> {
    if !(lam > 0.0 && lam.is_finite()) {
        return Err(CknError::InvalidArgument(format!("scale transform needs lam > 0, got {lam}")));
    }
    if lam == 1.0 {
        return Ok(u.clone());
    }
    dilate(u, lam.powf(params.scale_exponent()), lam)
}

/// Exponents `(grad, mass)` of the term scaling under [`scale_transform`].
pub fn scaling_exponents(params: &CknParams) -> (f64, f64) {
    let s = params.manifold_exponent();
    ((params.p - 1.0) * s, -s)
}

/// Which side of the counterexample chain is inflated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CounterexampleSide {
    Gradient,
    Mass,
}

/// Certificate that `δ(u_λ) ≤ C1·inf grad-distance + C2·inf mass-distance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub params: CknParams,
    pub c1: f64,
    pub c2: f64,
    pub side: CounterexampleSide,
    pub lam: f64,
    /// Scale-invariant deficit of `u` and of `u_λ`.
    pub deficit: f64,
    pub deficit_scaled: f64,
    /// Term of `u` and `u_λ` on the inflated side.
    pub term: f64,
    pub term_scaled: f64,
    /// `term(u) / inf distance(u)` checked `<= 2` before scaling.
    pub norm_ratio: f64,
    pub projection: ProjectionResult,
    /// `(C/2)·term(u_λ) - δ(u_λ)`.
    pub slack_deficit: f64,
    /// `C·inf(u_λ) - (C/2)·term(u_λ)`.
    pub slack_projection: f64,
    pub certified: bool,
    pub label: String,
}

/// The antisymmetric double bump on `[1, 2]`, which no single extremal
/// approximates to within half of its norm.
pub fn double_bump() -> RadialProfile {
    let up = bump_profile(1.0, 1.5, 1.0).expect("valid bump");
    let down = bump_profile(1.5, 2.0, 1.0).expect("valid bump");
    up.plus(&down.times(-1.0)).with_label("double_bump[1,2]")
}

/// Follows the scaling argument: picks `λ` so that the chosen side
/// dominates twice the deficit, then checks the chain with projections.
pub fn counterexample_search(
    u: &RadialProfile,
    params: &CknParams,
    c1: f64,
    c2: f64,
    scheme: &QuadratureScheme,
    cfg: &OptConfig,
) -> Result<CounterexampleReport> {
    require_hypotheses(TheoremId::Thm6, params)?;
    if !(c1 >= 0.0 && c2 >= 0.0 && c1 + c2 > 0.0) {
        return Err(CknError::InvalidArgument(format!("need C1, C2 >= 0 with C1 + C2 > 0, got ({c1}, {c2})")));
    }
    let d = deficit_si_detailed(u, params, scheme, None)?;
    if !d.resolved || d.value <= 0.0 {
        return Err(CknError::HypothesisViolation(format!(
            "{} is numerically on the extremal manifold (deficit {:.3e})",
            u.label, d.value
        )));
    }
    let (side, constant, kind, exponent, term) = if c1 > 0.0 {
        let (e, _) = scaling_exponents(params);
        (CounterexampleSide::Gradient, c1, DistanceKind::Grad { gamma: params.grad_weight() }, e, d.terms.grad)
    } else {
        let (_, e) = scaling_exponents(params);
        (CounterexampleSide::Mass, c2, DistanceKind::PowerLp { gamma: params.mass_weight() }, e, d.terms.mass)
    };

    let base = project_kind(u, params, kind, None, scheme, cfg)?;
    let norm_ratio = term / base.distance;
    if !(norm_ratio <= 2.0) {
        return Err(CknError::HypothesisViolation(format!(
            "{}: term/inf = {norm_ratio:.4} exceeds 2, the factor-2 comparison fails",
            u.label
        )));
    }

    // (C/2) λ^e term = 2δ
    let lam = (4.0 * d.value / (constant * term)).powf(1.0 / exponent);
    let ul = scale_transform(u, params, lam)?;
    let dl = deficit_si_detailed(&ul, params, scheme, None)?;
    let term_scaled = match side {
        CounterexampleSide::Gradient => dl.terms.grad,
        CounterexampleSide::Mass => dl.terms.mass,
    };
    let projection = project_kind(&ul, params, kind, None, scheme, cfg)?;
    let slack_deficit = 0.5 * constant * term_scaled - dl.value;
    let slack_projection = constant * projection.distance - 0.5 * constant * term_scaled;
    Ok(CounterexampleReport {
        params: *params,
        c1,
        c2,
        side,
        lam,
        deficit: d.value,
        deficit_scaled: dl.value,
        term,
        term_scaled,
        norm_ratio,
        projection,
        slack_deficit,
        slack_projection,
        certified: slack_deficit >= 0.0 && slack_projection >= 0.0,
        label: u.label.clone(),
    })
}
