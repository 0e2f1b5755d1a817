//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, even on success.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use ckn_core::experiments::{
    build_default_corpus, change_of_variables_check, default_poincare_configs, default_poincare_profiles,
    estimate_stability_constant, node_doubling_check, perturbed_extremal_corpus, poincare_campaign, verify_identities,
    ProfileFamily,
};
use ckn_core::functionals::{ckn_terms, deficit_si};
use ckn_core::manifold::{counterexample_search, double_bump, scale_transform, OptConfig};
use ckn_core::params::{hydrogen, sharp_constant_lp, theorem_preset, thm1_family, thm5_family, CknParams, Region, TheoremId};
use ckn_core::radial::{extremal_profile, extremal_profile_q, integrate, QuadratureScheme};
use ckn_core::vectorineq::{half_power_sub_gap, half_power_sum_gap, estimate_cp, scan_lemma_a, scan_vector_inequalities};

const IDENTITY_RESIDUAL: f64 = 1e-6;
const IDENTITY_BUDGET: Duration = Duration::from_secs(60);
const ATTAINMENT_TOL: f64 = 1e-6;
const SCALING_TOL: f64 = 1e-8;
const C_EMP_AT_TWO_TOL: f64 = 1e-12;
const ORACLE_AGREEMENT: f64 = 1e-9;
const POINCARE_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-8;
const DOUBLING_FACTOR: f64 = 10.0;
const VECTOR_SAMPLES: usize = 100_000;
const LEMMA_A_SAMPLES: usize = 100_000;
const SCALAR_GRID: usize = 10_000;
const BASELINE_BAND: f64 = 0.2;

type Outcome = Result<String, String>;
type Integrand = Box<dyn Fn(f64) -> f64>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn scheme() -> QuadratureScheme {
    QuadratureScheme::default()
}

fn identity_params() -> [CknParams; 3] {
    // the first set is N=3, p=1.5, a=4/3, b=2/3
    [thm1_family(3, 1.5), hydrogen(3), thm5_family(4, 2.0)]
}

fn identity_criterion(scale_invariant: bool) -> Outcome {
    let start = Instant::now();
    let sets = identity_params();
    let corpus = build_default_corpus(&sets, 0).map_err(|e| e.to_string())?;
    for k in 0..sets.len() {
        ensure(corpus.profiles_for(k) >= 14, || format!("set {k} has {} profiles", corpus.profiles_for(k)))?;
    }
    let report = verify_identities(&corpus, &scheme());
    let mut worst: f64 = 0.0;
    for row in &report.rows {
        let r = if scale_invariant { row.residual_si } else { row.residual_sni };
        ensure(r <= IDENTITY_RESIDUAL, || format!("{} (set {}): residual {r:e} {}", row.label, row.params_index, row.note))?;
        worst = worst.max(r);
    }
    let elapsed = start.elapsed();
    ensure(elapsed <= IDENTITY_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{} pairs, max residual {worst:.2e}, {:.2}s", report.rows.len(), elapsed.as_secs_f64()))
}

fn criterion_1() -> Outcome {
    identity_criterion(false)
}

fn criterion_2() -> Outcome {
    identity_criterion(true)
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for params in [thm1_family(3, 1.5), hydrogen(3)] {
        let k = sharp_constant_lp(&params);
        for lam in [0.5, 1.0, 2.0] {
            let u = extremal_profile(&params, 1.0, lam).map_err(|e| e.to_string())?;
            let t = ckn_terms(&u, &params, &scheme()).map_err(|e| e.to_string())?;
            let ratio = k * t.mixed / t.product();
            let d = deficit_si(&u, &params, &scheme(), None).map_err(|e| e.to_string())?;
            ensure((ratio - 1.0).abs() <= ATTAINMENT_TOL, || format!("{params} lam={lam}: ratio {ratio}"))?;
            ensure(d <= ATTAINMENT_TOL * t.product(), || format!("{params} lam={lam}: deficit {d:e}"))?;
            worst = worst.max((ratio - 1.0).abs());
        }
    }
    Ok(format!("6 extremals, max |ratio - 1| = {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let (n, a, b) = (4u32, 1.5, 1.5);
    ensure(n as f64 * (b - a + 3.0) == 2.0 * (3.0 * b - a + 3.0), || "not on the attainment curve".into())?;
    let params = CknParams { n, p: 2.0, a, b };
    let beta = match params.region() {
        Region::Q1 => 1.0,
        Region::Q2 => -1.0,
        other => return Err(format!("region {other:?} is outside Q")),
    };
    let constant = (n as f64 - (3.0 * b - a + 3.0)).abs() / 2.0;
    let u = extremal_profile_q(n, a, b, 1.0, beta).map_err(|e| e.to_string())?;
    let t = ckn_terms(&u, &params, &scheme()).map_err(|e| e.to_string())?;
    let d = deficit_si(&u, &params, &scheme(), Some(constant)).map_err(|e| e.to_string())?;
    let relative = d.abs() / t.product();
    ensure(relative <= ATTAINMENT_TOL, || format!("relative deficit {relative:e}"))?;
    Ok(format!("K = {constant}, relative deficit {relative:.2e}"))
}

fn criterion_5() -> Outcome {
    let params = theorem_preset(TheoremId::Thm1);
    let (p, s) = (params.p, params.b + 1.0 - params.a);
    let corpus = build_default_corpus(&[params], 11).map_err(|e| e.to_string())?;
    let profiles: Vec<_> =
        corpus.entries.iter().filter(|e| e.family == ProfileFamily::Bump).map(|e| e.profile.clone()).collect();
    ensure(profiles.len() == 5, || format!("{} bump profiles", profiles.len()))?;
    let mut worst: f64 = 0.0;
    for u in &profiles {
        let t = ckn_terms(u, &params, &scheme()).map_err(|e| e.to_string())?;
        let d = deficit_si(u, &params, &scheme(), None).map_err(|e| e.to_string())?;
        for lam in [0.1, 0.5, 2.0, 10.0] {
            let v = scale_transform(u, &params, lam).map_err(|e| e.to_string())?;
            let tv = ckn_terms(&v, &params, &scheme()).map_err(|e| e.to_string())?;
            let dv = deficit_si(&v, &params, &scheme(), None).map_err(|e| e.to_string())?;
            let errs = [
                rel(dv / d, 1.0),
                rel(tv.grad / t.grad, lam.powf((p - 1.0) * s)),
                rel(tv.mass / t.mass, lam.powf(-s)),
                rel(tv.mixed / t.mixed, 1.0),
            ];
            let e = errs.iter().cloned().fold(0.0, f64::max);
            ensure(e <= SCALING_TOL, || format!("{} lam={lam}: errors {errs:?}", u.label))?;
            worst = worst.max(e);
        }
    }
    Ok(format!("5 profiles x 4 scales, max relative error {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let params = theorem_preset(TheoremId::Thm6);
    let u = double_bump();
    let mut lines = Vec::new();
    for (c1, c2) in [(1.0, 0.0), (0.0, 1.0)] {
        let r = counterexample_search(&u, &params, c1, c2, &scheme(), &OptConfig::default()).map_err(|e| e.to_string())?;
        ensure(r.certified && r.slack_deficit >= 0.0 && r.slack_projection >= 0.0, || format!("{r:?}"))?;
        // recompute the chain from the certified λ
        let v = scale_transform(&u, &params, r.lam).map_err(|e| e.to_string())?;
        let t = ckn_terms(&v, &params, &scheme()).map_err(|e| e.to_string())?;
        let dv = deficit_si(&v, &params, &scheme(), None).map_err(|e| e.to_string())?;
        let c = c1.max(c2);
        let term = if c1 > 0.0 { t.grad } else { t.mass };
        ensure(dv <= 0.5 * c * term, || format!("deficit {dv} above (C/2) term {}", 0.5 * c * term))?;
        ensure(0.5 * term <= r.projection.distance, || format!("inf {} below term/2", r.projection.distance))?;
        ensure(r.projection.distance <= term * (1.0 + 1e-9), || "inf exceeds the distance to 0".into())?;
        lines.push(format!("({c1},{c2}): lam={:.3e} slacks {:.2e}/{:.2e}", r.lam, r.slack_deficit, r.slack_projection));
    }
    Ok(lines.join("; "))
}

/// `G_p(e1, e1 + t(cos φ, sin φ))` with `|Y|² = 1 + w`, written as
/// `[(1+w)^{p/2} - 1 - (p/2)w] + (p/2)t²` to avoid cancellation.
fn oracle_gp(t: f64, phi: f64, p: f64) -> f64 {
    let q = 0.5 * p;
    let w = 2.0 * t * phi.cos() + t * t;
    (q * w.ln_1p()).exp_m1() - q * w + q * t * t
}

fn oracle_ratio(t: f64, phi: f64, p: f64) -> f64 {
    let kernel = if p < 2.0 { t.powf(p).min(t * t) } else { t.powf(p) };
    oracle_gp(t, phi, p) / kernel
}

/// Minimum of `G_p / kernel` over `X = e1`, `Y = e1 + t(cos φ, sin φ)`;
/// homogeneity and rotation invariance reduce the problem to these two
/// variables. Grid scan, then alternating golden-section polish.
fn reduced_cp(p: f64) -> f64 {
    let (nt, nphi) = (400, 200);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nt {
        // t in [1e-2, 1e2]; the ratio is smooth and bounded away from 0 outside
        let t = 10f64.powf(-2.0 + 4.0 * i as f64 / nt as f64);
        for j in 0..=nphi {
            let phi = std::f64::consts::PI * j as f64 / nphi as f64;
            let v = oracle_ratio(t, phi, p);
            if v < best.0 {
                best = (v, t.ln(), phi);
            }
        }
    }
    let golden = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if f(x1) <= f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    };
    let (_, mut lt, mut phi) = best;
    let (dlt, dphi) = (4.0 * 10f64.ln() / nt as f64, std::f64::consts::PI / nphi as f64);
    for _ in 0..30 {
        lt = golden(&|x| oracle_ratio(x.exp(), phi, p), lt - dlt, lt + dlt);
        phi = golden(&|x| oracle_ratio(lt.exp(), x, p), (phi - dphi).max(0.0), (phi + dphi).min(std::f64::consts::PI));
    }
    oracle_ratio(lt.exp(), phi, p).min(best.0)
}

fn criterion_7() -> Outcome {
    // closed forms: 1/3 at p = 4, 2 - sqrt 2 at p = 3
    let frozen = [
        (1.1, 0.04354692507258615),
        (1.5, 0.3284271247461896),
        (1.9, 0.8321319661472288),
        (2.0, 1.0),
        (2.5, 0.7680186634970623),
        (3.0, 0.5857864376269049),
        (4.0, 1.0 / 3.0),
    ];
    let mut total = 0;
    for (k, (p, want)) in frozen.into_iter().enumerate() {
        let c_emp = reduced_cp(p);
        ensure(rel(c_emp, want) <= ORACLE_AGREEMENT, || format!("p={p}: oracle {c_emp} vs frozen {want}"))?;
        if p == 2.0 {
            ensure((c_emp - 1.0).abs() <= C_EMP_AT_TWO_TOL, || format!("c_emp at p=2 is {c_emp}"))?;
        }
        let lib = estimate_cp(p, VECTOR_SAMPLES, 7).map_err(|e| e.to_string())?.value;
        ensure(rel(lib, c_emp) <= 1e-6, || format!("p={p}: library estimate {lib} vs oracle {c_emp}"))?;
        let scan = scan_vector_inequalities(p, VECTOR_SAMPLES, 1000 + k as u64, 3, &[0.25, 0.5, 1.0], Some(c_emp))
            .map_err(|e| e.to_string())?;
        ensure(scan.violations() == 0, || format!("p={p}: {scan:?}"))?;
        total += scan.sample_count;
    }
    Ok(format!("{total} samples, 0 violations, oracle matches frozen c_p"))
}

fn criterion_8() -> Outcome {
    let scan = scan_lemma_a(LEMMA_A_SAMPLES, 5);
    ensure(scan.samples == LEMMA_A_SAMPLES, || format!("{scan:?}"))?;
    ensure(scan.general_violations == 0 && scan.same_sign_violations == 0, || format!("{scan:?}"))?;
    ensure(scan.same_sign_samples > 0, || "no same-sign samples".into())?;
    let mut checked = 0;
    for p in [1.1, 1.5, 1.9] {
        for i in 1..=SCALAR_GRID {
            let t = 10f64.powf(-4.0 + 8.0 * i as f64 / SCALAR_GRID as f64);
            ensure(half_power_sum_gap(t, p) < 0.0, || format!("h({t}, {p}) >= 0"))?;
            let t1 = 1.0 + t;
            ensure(half_power_sub_gap(t1, p) <= 0.0, || format!("f({t1}, {p}) > 0"))?;
            checked += 2;
        }
    }
    Ok(format!("{} samples ({} same-sign), {checked} scalar grid points", scan.samples, scan.same_sign_samples))
}

/// Constants from the first certified run (seed 0, default settings).
const STABILITY_BASELINES: [(TheoremId, f64); 6] = [
    (TheoremId::Thm1, 4.39923269055221),
    (TheoremId::Thm2, 3.04758191887947),
    (TheoremId::Thm3, 5.33140310587248),
    (TheoremId::Thm4, 0.800320449139427),
    (TheoremId::Thm5, 8.38293261124382),
    (TheoremId::ThmC, 13.5998964225119),
];

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    for (theorem, baseline) in STABILITY_BASELINES {
        let params = theorem_preset(theorem);
        let corpus = perturbed_extremal_corpus(&params, 0).map_err(|e| e.to_string())?;
        let est = estimate_stability_constant(&corpus, &params, theorem, &scheme(), &OptConfig::default())
            .map_err(|e| format!("{theorem}: {e}"))?;
        let value = est.constant.value;
        ensure(value > 0.0, || format!("{theorem}: constant {value}"))?;
        for row in &est.rows {
            if let ProfileFamily::Perturbed { eps } = row.family {
                ensure(!(eps >= 0.1 && row.excluded), || format!("{theorem}: {} excluded", row.label))?;
            }
        }
        ensure(rel(value, baseline) <= BASELINE_BAND, || format!("{theorem}: {value:.6e} outside 20% of {baseline:.6e}"))?;
        parts.push(format!("{theorem}={value:.4e}"));
    }
    Ok(parts.join(" "))
}

fn criterion_10() -> Outcome {
    let profiles = default_poincare_profiles();
    let configs = default_poincare_configs();
    ensure(profiles.len() == 5 && configs.len() == 12, || "unexpected campaign size".into())?;
    let rows = poincare_campaign(&profiles, &configs, 3, &scheme()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for row in &rows {
        let r = row.report.ratio;
        ensure(r.is_finite() && r > 0.0 || row.report.constant_on_domain, || format!("{}: ratio {r}", row.label))?;
        ensure(row.scaling.rel_diff <= POINCARE_TOL, || format!("{}: scaling {:e}", row.label, row.scaling.rel_diff))?;
        ensure(row.passed(), || format!("{}: {:?}", row.label, row.report))?;
        worst = worst.max(row.scaling.rel_diff);
    }
    // power profiles are not integrable over all of space, so only the decaying ones enter here
    let mut cov = 0;
    for f in profiles.iter().filter(|f| f.eval(50.0).abs() < 1e-12) {
        for k in [1.0, 2.0, 3.0] {
            let rep = change_of_variables_check(f, k, 3, &scheme()).map_err(|e| e.to_string())?;
            ensure(rep.rel_diff <= POINCARE_TOL, || format!("{} k={k}: {rep:?}", f.label))?;
            cov += 1;
        }
    }
    ensure(cov == 9, || format!("{cov} change-of-variables checks"))?;
    Ok(format!("{} rows, max scaling diff {worst:.2e}, {cov} change-of-variables checks", rows.len()))
}

fn criterion_11() -> Outcome {
    let pi = std::f64::consts::PI;
    // ∫ r^k e^{-r^m} dr = Γ((k+1)/m) / m
    let cases: [(&str, Integrand, f64); 3] = [
        ("r^2 e^-r", Box::new(|r: f64| r * r * (-r).exp()), 2.0),
        ("r^-1/2 e^-r", Box::new(|r: f64| (-r).exp() / r.sqrt()), pi.sqrt()),
        ("r^4 e^-r^2", Box::new(|r: f64| r.powi(4) * (-r * r).exp()), 3.0 * pi.sqrt() / 8.0),
    ];
    let mut worst: f64 = 0.0;
    for (name, g, want) in &cases {
        let got = integrate(g, &scheme()).map_err(|e| e.to_string())?;
        ensure(rel(got, *want) <= CLOSED_FORM_TOL, || format!("{name}: {got} vs {want}"))?;
        worst = worst.max(rel(got, *want));
    }
    let corpus = build_default_corpus(&identity_params(), 0).map_err(|e| e.to_string())?;
    let s = scheme();
    let rows = node_doubling_check(&corpus, &s).map_err(|e| e.to_string())?;
    let max_change = rows.iter().map(|r| r.rel_change).fold(0.0, f64::max);
    ensure(max_change <= DOUBLING_FACTOR * s.rel_tol, || format!("node doubling changed terms by {max_change:e}"))?;
    Ok(format!("closed forms within {worst:.2e}; doubling over {} pairs within {max_change:.2e}", rows.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("identity, non-invariant deficit", criterion_1),
        ("identity, scale-invariant deficit", criterion_2),
        ("extremal attainment", criterion_3),
        ("L2 attainment in Q", criterion_4),
        ("scaling laws", criterion_5),
        ("counterexample certificates", criterion_6),
        ("vector inequalities", criterion_7),
        ("scalar half-power lemma", criterion_8),
        ("stability constants", criterion_9),
        ("weighted Poincare", criterion_10),
        ("quadrature oracles", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
