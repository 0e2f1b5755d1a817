//! Parameter space of the first-order L^p CKN family.
//!
//! A parameter tuple `(N, p, a, b)` fixes the three weights of
//!
//! ```text
//! (∫|∇u|^p/|x|^{pb})^{1/p} (∫|u|^p/|x|^{pa})^{(p-1)/p} ≥ K ∫|u|^p/|x|^{(p-1)a+b+1}
//! ```
//!
//! Everything downstream (extremals, scaling, hypotheses of the stability
//! theorems) is expressed through the derived exponents on [`CknParams`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};

/// Relative tolerance for the equality hypotheses (e.g. `a = Nb/(N-p)`).
pub const HYPOTHESIS_REL_TOL: f64 = 1e-12;

/// The tuple `(N, p, a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CknParams {
    pub n: u32,
    pub p: f64,
    pub a: f64,
    pub b: f64,
}

impl CknParams {
    pub fn new(n: u32, p: f64, a: f64, b: f64) -> Result<Self> {
        let params = Self { n, p, a, b };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(CknError::InvalidArgument("dimension N must be >= 1".into()));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(CknError::InvalidArgument(format!("p must be > 1, got {}", self.p)));
        }
        if !self.a.is_finite() || !self.b.is_finite() {
            return Err(CknError::InvalidArgument("a and b must be finite".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> f64 {
        self.n as f64
    }

    /// Weight exponent of the gradient term, `pb`.
    pub fn grad_weight(&self) -> f64 {
        self.p * self.b
    }

    /// Weight exponent of the mass term, `pa`.
    pub fn mass_weight(&self) -> f64 {
        self.p * self.a
    }

    /// Weight exponent of the mixed term, `(p-1)a + b + 1`.
    pub fn mixed_weight(&self) -> f64 {
        (self.p - 1.0) * self.a + self.b + 1.0
    }

    /// Exponent of the extremal family, `b - a + 1`.
    pub fn manifold_exponent(&self) -> f64 {
        self.b - self.a + 1.0
    }

    /// `N - (p-1)a - b - 1`, the signed numerator of the sharp constant.
    pub fn sharp_numerator(&self) -> f64 {
        self.dim() - self.mixed_weight()
    }

    /// Amplitude exponent of the dilation `u_λ = λ^κ u(λ·)` that keeps the
    /// mixed term fixed.
    pub fn scale_exponent(&self) -> f64 {
        self.sharp_numerator() / self.p
    }

    pub fn region(&self) -> Region {
        classify_region(self.n, self.a, self.b)
    }

    /// Looks up a named parameter preset. See [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|(key, _)| *key == name)
            .map(|(_, build)| build())
            .ok_or_else(|| CknError::Config(format!("unknown preset '{name}'")))
    }
}

impl fmt::Display for CknParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={} p={} a={} b={}", self.n, self.p, self.a, self.b)
    }
}

/// Parameters with `N > 2`, `1 < p < 2`, `b = (N-2)/p`, `a = N(N-2)/(p(N-p))`.
pub fn thm1_family(n: u32, p: f64) -> CknParams {
    let nf = n as f64;
    CknParams {
        n,
        p,
        b: (nf - 2.0) / p,
        a: nf * (nf - 2.0) / (p * (nf - p)),
    }
}

/// Parameters with `N > p >= 2`, `b = (N-p)/(p+1)`, `a = N/(p+1) - 1/(p^2-1)`.
pub fn thm5_family(n: u32, p: f64) -> CknParams {
    let nf = n as f64;
    CknParams {
        n,
        p,
        b: (nf - p) / (p + 1.0),
        a: nf / (p + 1.0) - 1.0 / (p * p - 1.0),
    }
}

/// `N = 3, p = 2, a = b = 0`: the hydrogen uncertainty principle.
pub fn hydrogen(n: u32) -> CknParams {
    CknParams { n, p: 2.0, a: 0.0, b: 0.0 }
}

type PresetBuilder = fn() -> CknParams;

/// Named parameter presets, one per theorem plus the hydrogen case.
pub const PRESETS: &[(&str, PresetBuilder)] = &[
    ("thm1-default", || thm1_family(3, 1.5)),
    ("thm2-default", || hydrogen(3)),
    ("thm3-default", || thm1_family(3, 1.5)),
    ("thm4-default", || hydrogen(3)),
    ("thm5-default", || thm5_family(4, 2.0)),
    ("thmc-default", || thm5_family(4, 2.0)),
    ("hydrogen", || hydrogen(3)),
    ("lp3-default", || CknParams { n: 5, p: 3.0, a: 0.2, b: 0.5 }),
];

/// Default preset for each theorem.
pub fn theorem_preset(theorem: TheoremId) -> CknParams {
    match theorem {
        TheoremId::Thm1 | TheoremId::Thm3 | TheoremId::Thm6 => thm1_family(3, 1.5),
        TheoremId::Thm2 | TheoremId::Thm4 => hydrogen(3),
        TheoremId::Thm5 | TheoremId::ThmC => thm5_family(4, 2.0),
    }
}

/// Regions of the `(a, b)` plane for the L² inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    P1,
    P2,
    P,
    Q1,
    Q2,
    Q,
    Diagonal,
    Other,
}

impl Region {
    /// Set inclusion between tags: `P1 ⊂ P`, `Q2 ⊂ Q`, every tag contains itself.
    pub fn within(self, other: Region) -> bool {
        self == other
            || matches!(
                (self, other),
                (Region::P1, Region::P) | (Region::P2, Region::P) | (Region::Q1, Region::Q) | (Region::Q2, Region::Q)
            )
    }

    pub fn is_p(self) -> bool {
        self.within(Region::P)
    }

    pub fn is_q(self) -> bool {
        self.within(Region::Q)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Classifies `(a, b)` for dimension `N`.
///
/// On the line `b = (N-2)/2` a point belongs to both a P and a Q region; the
/// P tag is returned and [`also_in_q`] reports the second membership.
pub fn classify_region(n: u32, a: f64, b: f64) -> Region {
    let s = b - a + 1.0;
    let mid = (n as f64 - 2.0) / 2.0;
    if !(s.is_finite() && mid.is_finite() && b.is_finite()) {
        return Region::Other;
    }
    if s == 0.0 {
        return Region::Diagonal;
    }
    if s > 0.0 {
        if b <= mid {
            Region::P1
        } else {
            Region::Q2
        }
    } else if b >= mid {
        Region::P2
    } else {
        Region::Q1
    }
}

/// True when `(a, b)` also satisfies the Q-region inequalities.
pub fn also_in_q(n: u32, a: f64, b: f64) -> bool {
    let s = b - a + 1.0;
    let mid = (n as f64 - 2.0) / 2.0;
    (s < 0.0 && b <= mid) || (s > 0.0 && b >= mid)
}

/// Sharp constant of the L² inequality (p = 2) in every region.
pub fn sharp_constant_l2(n: u32, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    match classify_region(n, a, b) {
        Region::P1 | Region::P2 | Region::P => (nf - (a + b + 1.0)).abs() / 2.0,
        Region::Q1 | Region::Q2 | Region::Q => (nf - (3.0 * b - a + 3.0)).abs() / 2.0,
        Region::Diagonal => (nf - 2.0 * (b + 1.0)).abs() / 2.0,
        Region::Other => f64::NAN,
    }
}

/// Sharp constant `|N - (p-1)a - b - 1| / p` of the scale-invariant inequality.
pub fn sharp_constant_lp(params: &CknParams) -> f64 {
    params.sharp_numerator().abs() / params.p
}

/// Theorems whose hypotheses can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Thm6,
    ThmC,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Thm1,
        TheoremId::Thm2,
        TheoremId::Thm3,
        TheoremId::Thm4,
        TheoremId::Thm5,
        TheoremId::Thm6,
        TheoremId::ThmC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::Thm1 => "thm1",
            TheoremId::Thm2 => "thm2",
            TheoremId::Thm3 => "thm3",
            TheoremId::Thm4 => "thm4",
            TheoremId::Thm5 => "thm5",
            TheoremId::Thm6 => "thm6",
            TheoremId::ThmC => "thmc",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = CknError;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| CknError::Config(format!("unknown theorem '{s}'")))
    }
}

/// One named hypothesis and whether it holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub holds: bool,
}

fn rel_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= HYPOTHESIS_REL_TOL * x.abs().max(y.abs()).max(1.0)
}

/// Evaluates every hypothesis of `theorem` individually.
pub fn check_hypotheses(theorem: TheoremId, params: &CknParams) -> Vec<Hypothesis> {
    let CknParams { p, a, b, .. } = *params;
    let n = params.dim();
    let h = |name, holds| Hypothesis { name, holds };
    let b_upper = (n - p) / p;
    let a_critical = n * b / (n - p);
    let n_gt_p = n > p;

    match theorem {
        TheoremId::Thm1 | TheoremId::Thm3 => vec![
            h("N > 2", n > 2.0),
            h("1 < p < 2", p > 1.0 && p < 2.0),
            h("b >= 0", b >= 0.0),
            h("b < (N-p)/p", n_gt_p && b < b_upper),
            h("a = Nb/(N-p)", n_gt_p && rel_eq(a, a_critical)),
        ],
        TheoremId::Thm2 | TheoremId::Thm4 => vec![
            h("N > p", n_gt_p),
            h("p >= 2", p >= 2.0),
            h("b >= 0", b >= 0.0),
            h("b < (N-p)/p", n_gt_p && b < b_upper),
            h("a = Nb/(N-p)", n_gt_p && rel_eq(a, a_critical)),
        ],
        TheoremId::Thm5 => vec![
            h("N > p", n_gt_p),
            h("p >= 2", p >= 2.0),
            h("b >= 0", b >= 0.0),
            h("b < (N-p)/p", n_gt_p && b < b_upper),
            h("a < Nb/(N-p)", n_gt_p && a < a_critical),
            h("(p-1)a+b+1 = pbN/(N-p)", n_gt_p && rel_eq(params.mixed_weight(), p * b * n / (n - p))),
        ],
        TheoremId::ThmC => vec![
            h("p >= 2", p >= 2.0),
            h("b >= 0", b >= 0.0),
            h("b < (N-p)/p", n_gt_p && b < b_upper),
            h("a < Nb/(N-p)", n_gt_p && a < a_critical),
            h("(p-1)a+b+1 = pbN/(N-p)", n_gt_p && rel_eq(params.mixed_weight(), p * b * n / (n - p))),
        ],
        TheoremId::Thm6 => vec![
            h("N >= 1", params.n >= 1),
            h("p > 1", p > 1.0),
            h("b - a + 1 > 0", params.manifold_exponent() > 0.0),
            h("b <= (N-p)/p", b <= b_upper),
        ],
    }
}

pub fn hypotheses_hold(theorem: TheoremId, params: &CknParams) -> bool {
    check_hypotheses(theorem, params).iter().all(|h| h.holds)
}

/// Errors with the first failing hypothesis, if any.
pub fn require_hypotheses(theorem: TheoremId, params: &CknParams) -> Result<()> {
    match check_hypotheses(theorem, params).into_iter().find(|h| !h.holds) {
        Some(h) => Err(CknError::HypothesisViolation(format!("{theorem}: {} fails at {params}", h.name))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    #[test]
    fn region_examples() {
        assert_eq!(classify_region(3, 0.0, 0.0), Region::P1);
        assert_eq!(classify_region(3, 1.0, 0.0), Region::Diagonal);
        assert_eq!(classify_region(4, 3.0, 2.0), Region::Diagonal);
        // b - a + 1 = -0.5 < 0 and b = 2 >= (N-2)/2 = 1
        assert_eq!(classify_region(4, 3.5, 2.0), Region::P2);
        assert_eq!(classify_region(4, 1.5, 1.5), Region::Q2);
        assert_eq!(classify_region(4, 2.0, 0.0), Region::Q1);
    }

    #[test]
    fn boundary_line_reports_p_and_flags_q() {
        // b = (N-2)/2 = 0.5 for N = 3
        assert_eq!(classify_region(3, 0.0, 0.5), Region::P1);
        assert!(also_in_q(3, 0.0, 0.5));
        assert_eq!(classify_region(3, 3.0, 0.5), Region::P2);
        assert!(also_in_q(3, 3.0, 0.5));
        assert!(!also_in_q(3, 0.0, 0.0));
    }

    #[test]
    fn region_tags_nest() {
        assert!(Region::P1.within(Region::P));
        assert!(Region::Q2.is_q());
        assert!(!Region::P1.is_q());
        assert!(!Region::Diagonal.is_p());
    }

    #[test]
    fn l2_constants() {
        assert!(close(sharp_constant_l2(3, 0.0, 0.0), 1.0, 1e-15));
        assert!(close(sharp_constant_l2(3, 1.0, 0.0), 0.5, 1e-15));
        // P2: |4 - (3.5 + 2 + 1)| / 2
        assert!(close(sharp_constant_l2(4, 3.5, 2.0), 1.25, 1e-15));
        // Q2: |4 - (4.5 - 1.5 + 3)| / 2
        assert!(close(sharp_constant_l2(4, 1.5, 1.5), 1.0, 1e-15));
    }

    #[test]
    fn lp_constants() {
        assert!(close(sharp_constant_lp(&hydrogen(3)), 1.0, 1e-15));
        let p = thm1_family(3, 1.5);
        assert!(close(sharp_constant_lp(&p), 4.0 / 9.0, 1e-14));
        let degenerate = CknParams { n: 3, p: 2.0, a: 1.0, b: 1.0 };
        assert_eq!(sharp_constant_lp(&degenerate), 0.0);
    }

    #[test]
    fn thm1_preset_satisfies_all() {
        let p = thm1_family(3, 1.5);
        assert!(close(p.b, 2.0 / 3.0, 1e-15));
        assert!(close(p.a, 4.0 / 3.0, 1e-15));
        assert!(check_hypotheses(TheoremId::Thm1, &p).iter().all(|h| h.holds));
        assert!(hypotheses_hold(TheoremId::Thm3, &p));
        assert!(hypotheses_hold(TheoremId::Thm6, &p));
    }

    #[test]
    fn thm5_preset_satisfies_all() {
        let p = thm5_family(4, 2.0);
        assert!(close(p.b, 2.0 / 3.0, 1e-15));
        assert!(close(p.a, 1.0, 1e-15));
        assert!(hypotheses_hold(TheoremId::Thm5, &p));
        assert!(hypotheses_hold(TheoremId::ThmC, &p));
        assert!(!hypotheses_hold(TheoremId::Thm2, &p));
    }

    #[test]
    fn thm2_rejects_small_p() {
        let p = CknParams { n: 3, p: 1.5, a: 0.0, b: 0.0 };
        let checks = check_hypotheses(TheoremId::Thm2, &p);
        assert!(checks.iter().any(|h| h.name == "p >= 2" && !h.holds));
        assert!(require_hypotheses(TheoremId::Thm2, &p).is_err());
    }

    #[test]
    fn hydrogen_satisfies_thm2_and_thm4() {
        let p = hydrogen(3);
        assert!(hypotheses_hold(TheoremId::Thm2, &p));
        assert!(hypotheses_hold(TheoremId::Thm4, &p));
        assert_eq!(p.region(), Region::P1);
    }

    #[test]
    fn every_preset_resolves() {
        for (name, _) in PRESETS {
            let p = CknParams::preset(name).unwrap();
            assert!(p.validate().is_ok());
            assert!(hypotheses_hold(TheoremId::Thm6, &p), "{name}");
        }
        assert!(CknParams::preset("nope").is_err());
    }

    #[test]
    fn theorem_names_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.name().parse::<TheoremId>().unwrap(), t);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(CknParams::new(0, 2.0, 0.0, 0.0).is_err());
        assert!(CknParams::new(3, 1.0, 0.0, 0.0).is_err());
        assert!(CknParams::new(3, f64::NAN, 0.0, 0.0).is_err());
    }
}
