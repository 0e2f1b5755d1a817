//! Pointwise vector inequalities and brute-force constant scanners.
//!
//! `G_p(X, Y) = |Y|^p - |X|^p - p|X|^{p-2} X·(Y-X)` is the Bregman remainder
//! of `V ↦ |V|^p`. The scanners sample `(X, Y)` pairs and estimate the best
//! constants in the lower bounds for `G_p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::optimize::nelder_mead;

/// Samples drawn per RNG stream.
pub const CHUNK: usize = 4096;

/// Relative slack used when flagging violations.
pub const VIOLATION_TOL: f64 = 1e-12;

/// A pair of vectors and an exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: f64,
}

/// Input that attains an empirical constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Vectors(VecPair),
    Scalars { m: f64, n: f64, p: f64 },
    Profile { label: String },
    None,
}

/// An empirically estimated constant with the input that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstant {
    pub value: f64,
    pub sample_count: usize,
    pub worst_witness: Witness,
    pub scan_description: String,
    pub seed: u64,
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub margin: f64,
    pub violated: bool,
    pub witness: Vec<f64>,
}

impl InequalityReport {
    fn new(lhs: f64, rhs: f64, witness: Vec<f64>) -> Self {
        let violated = lhs > rhs + VIOLATION_TOL * lhs.abs().max(rhs.abs());
        Self { lhs, rhs, margin: rhs - lhs, violated, witness }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `(1+t)^q - 1 - q t` where `one_plus_t = 1 + t` is supplied separately
/// so that it stays nonnegative under rounding.
fn binomial_tail(q: f64, t: f64, one_plus_t: f64) -> f64 {
    if t.abs() < 1e-2 {
        let mut term = 0.5 * q * (q - 1.0) * t * t;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() && k < 40.0 {
            term *= (q - k) / (k + 1.0) * t;
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        one_plus_t.powf(q) - 1.0 - q * t
    }
}

/// `G_p(X, Y)`, evaluated without catastrophic cancellation.
///
/// At `X = 0` the product `|X|^{p-2} X·(Y-X)` is taken as 0.
pub fn g_p(x: &[f64], y: &[f64], p: f64) -> f64 {
    assert_eq!(x.len(), y.len(), "g_p: dimension mismatch");
    let nx2 = dot(x, x);
    let (mut nd2, mut xd) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let d = b - a;
        nd2 += d * d;
        xd += a * d;
    }
    if nd2 == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return nd2;
    }
    if nx2 == 0.0 {
        return nd2.powf(0.5 * p);
    }
    let q = 0.5 * p;
    if nd2 <= nx2 {
        // |Y|² = |X|²(1 + t)
        let t = (2.0 * xd + nd2) / nx2;
        let ratio = if t.abs() < 1e-2 { 1.0 + t } else { dot(y, y) / nx2 };
        nx2.powf(q) * (binomial_tail(q, t, ratio) + q * nd2 / nx2)
    } else {
        let ny2 = dot(y, y);
        ny2.powf(q) - nx2.powf(q) - p * nx2.powf(q - 1.0) * xd
    }
}

/// Scalar form of [`g_p`] for collinear arguments.
pub fn g_p_scalar(x: f64, y: f64, p: f64) -> f64 {
    g_p(&[x], &[y], p)
}

/// The comparison vector `z(x, s)` with `s = x + y`.
pub fn fz_z_vector(x: &[f64], s: &[f64], p: f64) -> Result<Vec<f64>> {
    if !(p > 1.0) || p == 2.0 {
        return Err(CknError::InvalidArgument(format!("z-vector needs p > 1, p != 2, got {p}")));
    }
    if x.len() != s.len() {
        return Err(CknError::InvalidArgument("z-vector: dimension mismatch".into()));
    }
    let nx = norm(x);
    let ns = norm(s);
    if nx == 0.0 && ns == 0.0 {
        return Err(CknError::InvalidArgument("z-vector undefined for x = s = 0".into()));
    }
    if p < 2.0 {
        if nx < ns {
            let denom = (2.0 - p) * ns + (p - 1.0) * nx;
            if denom == 0.0 {
                return Err(CknError::UndefinedDenominator);
            }
            let factor = (ns / denom).powf(1.0 / (p - 2.0));
            Ok(x.iter().map(|v| factor * v).collect())
        } else {
            Ok(x.to_vec())
        }
    } else if nx < ns {
        Ok(x.to_vec())
    } else {
        let factor = (ns / nx).powf(1.0 / (p - 2.0));
        Ok(s.iter().map(|v| factor * v).collect())
    }
}

/// The three summands of the lower bound: `(quadratic, z-term, c-kernel)`,
/// so that the bound is `(1-γ)/2 (quadratic + z-term) + c · c-kernel`.
fn fz_parts(x: &[f64], y: &[f64], p: f64) -> Result<(f64, f64, f64)> {
    let ny2 = dot(y, y);
    if ny2 == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let nx = norm(x);
    let ny = ny2.sqrt();
    let c_kernel = if p < 2.0 && nx > 0.0 { ny.powf(p).min(nx.powf(p - 2.0) * ny2) } else { ny.powf(p) };
    if p == 2.0 {
        return Ok((2.0 * ny2, 0.0, c_kernel));
    }
    if p < 2.0 && nx == 0.0 {
        // both summands vanish in the limit |x| → 0
        return Ok((0.0, 0.0, c_kernel));
    }
    let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let ns = norm(&s);
    let z = fz_z_vector(x, &s, p)?;
    let nz = norm(&z);
    // |x| - |x+y| without cancellation
    let diff = if nx + ns > 0.0 { -(2.0 * dot(x, y) + ny2) / (nx + ns) } else { 0.0 };
    let quad = p * nx.powf(p - 2.0) * ny2;
    let zterm = if nz == 0.0 { 0.0 } else { p * (p - 2.0) * nz.powf(p - 2.0) * diff * diff };
    Ok((quad, zterm, c_kernel))
}

/// Right-hand side of the two-sided lower bound for `G_p(x, x+y)`.
pub fn fz_lower_bound(x: &[f64], y: &[f64], p: f64, gamma: f64, c_pg: f64) -> Result<f64> {
    if !(p > 1.0) || !(gamma > 0.0) || !(c_pg >= 0.0) {
        return Err(CknError::InvalidArgument(format!("need p > 1, gamma > 0, c >= 0; got {p}, {gamma}, {c_pg}")));
    }
    if x.len() != y.len() {
        return Err(CknError::InvalidArgument("fz_lower_bound: dimension mismatch".into()));
    }
    let (quad, zterm, ck) = fz_parts(x, y, p)?;
    Ok(0.5 * (1.0 - gamma) * (quad + zterm) + c_pg * ck)
}

/// `min{|Y-X|^p, |X|^{p-2}|Y-X|²}` for `p < 2`, `|Y-X|^p` otherwise.
pub fn cor_lower_bound_kernel(x: &[f64], y: &[f64], p: f64) -> f64 {
    let nd2: f64 = x.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum();
    if nd2 == 0.0 {
        return 0.0;
    }
    let dp = nd2.powf(0.5 * p);
    if p < 2.0 {
        let nx2 = dot(x, x);
        if nx2 == 0.0 {
            dp
        } else {
            dp.min(nx2.powf(0.5 * p - 1.0) * nd2)
        }
    } else {
        dp
    }
}

/// `G_p / kernel`, or `None` when the kernel vanishes.
pub fn cp_ratio(x: &[f64], y: &[f64], p: f64) -> Option<f64> {
    let k = cor_lower_bound_kernel(x, y, p);
    if k > 0.0 && k.is_finite() {
        Some(g_p(x, y, p) / k)
    } else {
        None
    }
}

fn rng_for(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.gen_range(lo_exp..hi_exp))
}

/// Draws one `(X, Y)` stress sample.
///
/// Mixes independent log-uniform magnitudes in `[1e-6, 1e6]`, near-collinear
/// pairs, near-equal pairs and strongly scale-separated pairs.
pub fn sample_pair(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let scale = |v: Vec<f64>, m: f64| -> Vec<f64> { v.into_iter().map(|c| c * m).collect() };
    let kind = rng.gen_range(0..4);
    let mx = log_uniform(rng, -6.0, 6.0);
    let x = scale(unit_vector(rng, dim), mx);
    let y = match kind {
        0 => scale(unit_vector(rng, dim), log_uniform(rng, -6.0, 6.0)),
        1 => {
            let t = log_uniform(rng, -6.0, 6.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let jitter = log_uniform(rng, -9.0, -1.0) * mx;
            let e = unit_vector(rng, dim);
            x.iter().zip(&e).map(|(a, b)| t * a + jitter * b).collect()
        }
        2 => {
            let d = log_uniform(rng, -8.0, 0.0) * mx;
            let e = unit_vector(rng, dim);
            x.iter().zip(&e).map(|(a, b)| a + d * b).collect()
        }
        _ => {
            let ratio = log_uniform(rng, 3.0, 9.0);
            let m = if rng.gen_bool(0.5) { mx * ratio } else { mx / ratio };
            scale(unit_vector(rng, dim), m)
        }
    };
    (x, y)
}

/// Generates samples `[0, count)` in parallel; identical for any thread count.
pub fn for_each_sample<T, F, R>(count: usize, seed: u64, dim: usize, init: T, fold: F, reduce: R) -> T
where
    T: Clone + Send + Sync,
    F: Fn(T, usize, &[f64], &[f64]) -> T + Sync,
    R: Fn(T, T) -> T + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partials: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c);
            let mut acc = init.clone();
            let end = ((c + 1) * CHUNK).min(count);
            for i in c * CHUNK..end {
                let (x, y) = sample_pair(&mut rng, dim);
                acc = fold(acc, i, &x, &y);
            }
            acc
        })
        .collect();
    partials.into_iter().fold(init, reduce)
}

/// Ratio in reduced coordinates: `|X| = 1`, `|Y-X| = e^{lr}`, angle `th`.
fn reduced_pair(lr: f64, th: f64, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let rho = lr.exp();
    let mut x = vec![0.0; dim.max(2)];
    x[0] = 1.0;
    let mut y = x.clone();
    y[0] += rho * th.cos();
    y[1] += rho * th.sin();
    (x, y)
}

fn reduced_ratio(lr: f64, th: f64, p: f64, dim: usize) -> f64 {
    let (x, y) = reduced_pair(lr, th, dim);
    cp_ratio(&x, &y, p).unwrap_or(f64::INFINITY)
}

/// Empirical `c_p = inf G_p(X,Y) / kernel(X,Y)` over random samples.
///
/// The worst samples are polished by Nelder-Mead in the reduced
/// coordinates `(ln|Y-X|/|X|, angle)`, on which the ratio depends
/// exclusively by scale and rotation invariance.
pub fn estimate_cp(p: f64, sample_count: usize, seed: u64) -> Result<EmpiricalConstant> {
    const MIN_SAMPLES: usize = 10_000;
    const DIM: usize = 3;
    const KEEP: usize = 8;
    if !(p > 1.0) {
        return Err(CknError::InvalidArgument(format!("p must be > 1, got {p}")));
    }
    if sample_count < MIN_SAMPLES {
        return Err(CknError::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {sample_count}")));
    }

    type Worst = Vec<(f64, usize, Vec<f64>, Vec<f64>)>;
    let merge = |mut a: Worst, b: Worst| -> Worst {
        a.extend(b);
        a.sort_by(|u, v| u.0.total_cmp(&v.0).then(u.1.cmp(&v.1)));
        a.truncate(KEEP);
        a
    };
    let worst: Worst = for_each_sample(
        sample_count,
        seed,
        DIM,
        Vec::new(),
        |acc: Worst, i, x, y| match cp_ratio(x, y, p) {
            Some(r) if acc.len() < KEEP || r < acc[acc.len() - 1].0 => merge(acc, vec![(r, i, x.to_vec(), y.to_vec())]),
            _ => acc,
        },
        merge,
    );
    let Some(first) = worst.first() else {
        return Err(CknError::InvalidArgument("no sample had a nonzero kernel".into()));
    };

    let mut best_value = first.0;
    let mut best_witness = VecPair { x: first.2.clone(), y: first.3.clone(), p };
    let mut polished = 0;
    for (_, _, x, y) in &worst {
        let nx = norm(x);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
        let nd = norm(&d);
        if nx == 0.0 || nd == 0.0 {
            continue;
        }
        let cos = (dot(x, &d) / (nx * nd)).clamp(-1.0, 1.0);
        let start = [(nd / nx).ln(), cos.acos()];
        let (v, _, _) = nelder_mead(|z| reduced_ratio(z[0], z[1], p, DIM), &start, &[0.2, 0.2], 1e-16, 4000);
        polished += 1;
        let (rx, ry) = reduced_pair(v[0], v[1], DIM);
        if let Some(val) = cp_ratio(&rx, &ry, p) {
            if val < best_value {
                best_value = val;
                best_witness = VecPair { x: rx, y: ry, p };
            }
        }
    }

    Ok(EmpiricalConstant {
        value: best_value,
        sample_count,
        worst_witness: Witness::Vectors(best_witness),
        scan_description: format!(
            "min of G_p/kernel over {sample_count} stress samples in R^{DIM}, {polished} worst polished in reduced coordinates"
        ),
        seed,
    })
}

/// Result of [`lemma_a_check`]: the general bound and, for same-sign
/// inputs, the refined one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaAReport {
    pub general: InequalityReport,
    pub same_sign: Option<InequalityReport>,
}

impl LemmaAReport {
    pub fn violated(&self) -> bool {
        self.general.violated || self.same_sign.as_ref().is_some_and(|r| r.violated)
    }
}

/// `sign(t)|t|^{p/2}`.
pub fn half_power(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(0.5 * p)
    }
}

/// `(H(m) - H(n))² <= 4|m-n|^p`, and `<= |m-n|^p` when `m n > 0`.
pub fn lemma_a_check(m: f64, n: f64, p: f64) -> Result<LemmaAReport> {
    if !(p > 1.0 && p < 2.0) {
        return Err(CknError::InvalidArgument(format!("needs 1 < p < 2, got {p}")));
    }
    let d = half_power(m, p) - half_power(n, p);
    let lhs = d * d;
    let dp = (m - n).abs().powf(p);
    let general = InequalityReport::new(lhs, 4.0 * dp, vec![m, n, p]);
    let same_sign = (m * n > 0.0).then(|| InequalityReport::new(lhs, dp, vec![m, n, p]));
    Ok(LemmaAReport { general, same_sign })
}

/// `|m+n|^q <= C_q (|m|^q + |n|^q)` with `C_q = max(1, 2^{q-1})`.
pub fn power_sum_bound_check(m: f64, n: f64, q: f64) -> Result<InequalityReport> {
    if !(q > 0.0) {
        return Err(CknError::InvalidArgument(format!("needs q > 0, got {q}")));
    }
    let cq = 2f64.powf(q - 1.0).max(1.0);
    let lhs = (m + n).abs().powf(q);
    let rhs = cq * (m.abs().powf(q) + n.abs().powf(q));
    Ok(InequalityReport::new(lhs, rhs, vec![m, n, q]))
}

/// `t^{p/2} - 1 - (t-1)^{p/2}`, negative for `t > 1`.
pub fn half_power_sub_gap(t: f64, p: f64) -> f64 {
    t.powf(0.5 * p) - 1.0 - (t - 1.0).powf(0.5 * p)
}

/// `t^{p/2} + 1 - 2(t+1)^{p/2}`, negative for `t > 0`.
pub fn half_power_sum_gap(t: f64, p: f64) -> f64 {
    t.powf(0.5 * p) + 1.0 - 2.0 * (t + 1.0).powf(0.5 * p)
}

/// Violation count of one lower bound over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundScan {
    pub gamma: f64,
    pub violations: usize,
    /// Smallest `(G_p - bound) / scale` seen.
    pub worst_margin: f64,
}

/// Output of [`scan_vector_inequalities`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorScanReport {
    pub p: f64,
    pub dim: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub gp_negative: usize,
    pub fz: Vec<BoundScan>,
    pub c_emp: Option<f64>,
    pub cp_violations: usize,
    /// Smallest `G_p / kernel` seen in this sample set.
    pub min_ratio: f64,
}

impl VectorScanReport {
    pub fn violations(&self) -> usize {
        self.gp_negative + self.cp_violations + self.fz.iter().map(|f| f.violations).sum::<usize>()
    }
}

#[derive(Clone)]
struct ScanAcc {
    gp_negative: usize,
    fz_viol: Vec<usize>,
    fz_margin: Vec<f64>,
    cp_viol: usize,
    min_ratio: f64,
}

/// Checks `G_p >= 0`, the c-free lower bound for each `gamma`, and
/// `G_p >= c_emp · kernel` over `sample_count` samples.
pub fn scan_vector_inequalities(
    p: f64,
    sample_count: usize,
    seed: u64,
    dim: usize,
    gammas: &[f64],
    c_emp: Option<f64>,
) -> Result<VectorScanReport> {
    if !(p > 1.0) || dim == 0 {
        return Err(CknError::InvalidArgument(format!("need p > 1 and dim >= 1, got p={p}, dim={dim}")));
    }
    if let Some(&g) = gammas.iter().find(|g| !(**g > 0.0)) {
        return Err(CknError::InvalidArgument(format!("gamma must be positive, got {g}")));
    }
    let init = ScanAcc {
        gp_negative: 0,
        fz_viol: vec![0; gammas.len()],
        fz_margin: vec![f64::INFINITY; gammas.len()],
        cp_viol: 0,
        min_ratio: f64::INFINITY,
    };
    let fold = |mut acc: ScanAcc, _i: usize, x: &[f64], y: &[f64]| -> ScanAcc {
        let g = g_p(x, y, p);
        let nx = norm(x);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
        let nd = norm(&d);
        let gp_scale = norm(y).powf(p) + nx.powf(p) + p * nx.powf(p - 1.0) * nd;
        if g < -VIOLATION_TOL * gp_scale {
            acc.gp_negative += 1;
        }
        if let Ok((quad, zterm, _)) = fz_parts(x, &d, p) {
            for (k, gamma) in gammas.iter().enumerate() {
                let bound = 0.5 * (1.0 - gamma) * (quad + zterm);
                let scale = 0.5 * (1.0 - gamma).abs() * (quad.abs() + zterm.abs()) + g.abs();
                if scale > 0.0 {
                    let margin = (g - bound) / scale;
                    acc.fz_margin[k] = acc.fz_margin[k].min(margin);
                    if margin < -VIOLATION_TOL {
                        acc.fz_viol[k] += 1;
                    }
                }
            }
        }
        let k = cor_lower_bound_kernel(x, y, p);
        if k > 0.0 {
            acc.min_ratio = acc.min_ratio.min(g / k);
            if let Some(c) = c_emp {
                if g < c * k * (1.0 - VIOLATION_TOL) {
                    acc.cp_viol += 1;
                }
            }
        }
        acc
    };
    let reduce = |mut a: ScanAcc, b: ScanAcc| -> ScanAcc {
        a.gp_negative += b.gp_negative;
        a.cp_viol += b.cp_viol;
        a.min_ratio = a.min_ratio.min(b.min_ratio);
        for k in 0..a.fz_viol.len() {
            a.fz_viol[k] += b.fz_viol[k];
            a.fz_margin[k] = a.fz_margin[k].min(b.fz_margin[k]);
        }
        a
    };
    let acc = for_each_sample(sample_count, seed, dim, init, fold, reduce);
    Ok(VectorScanReport {
        p,
        dim,
        sample_count,
        seed,
        gp_negative: acc.gp_negative,
        fz: gammas
            .iter()
            .enumerate()
            .map(|(k, &gamma)| BoundScan { gamma, violations: acc.fz_viol[k], worst_margin: acc.fz_margin[k] })
            .collect(),
        c_emp,
        cp_violations: acc.cp_viol,
        min_ratio: acc.min_ratio,
    })
}

/// Violation counts of a half-power sampling campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaAScan {
    pub samples: usize,
    pub general_violations: usize,
    pub same_sign_samples: usize,
    pub same_sign_violations: usize,
}

/// Samples `(m, n) ∈ [-10, 10]²` and `p ∈ (1, 2)`.
pub fn scan_lemma_a(sample_count: usize, seed: u64) -> LemmaAScan {
    let chunks = sample_count.div_ceil(CHUNK);
    let parts: Vec<LemmaAScan> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c);
            let mut acc = LemmaAScan { samples: 0, general_violations: 0, same_sign_samples: 0, same_sign_violations: 0 };
            for _ in c * CHUNK..((c + 1) * CHUNK).min(sample_count) {
                let m = rng.gen_range(-10.0..10.0);
                let n = rng.gen_range(-10.0..10.0);
                let p = 1.0 + rng.gen_range(f64::EPSILON..1.0);
                let p = p.min(2.0 - f64::EPSILON);
                let rep = lemma_a_check(m, n, p).expect("p sampled inside (1, 2)");
                acc.samples += 1;
                acc.general_violations += rep.general.violated as usize;
                if let Some(s) = rep.same_sign {
                    acc.same_sign_samples += 1;
                    acc.same_sign_violations += s.violated as usize;
                }
            }
            acc
        })
        .collect();
    parts.into_iter().fold(
        LemmaAScan { samples: 0, general_violations: 0, same_sign_samples: 0, same_sign_violations: 0 },
        |a, b| LemmaAScan {
            samples: a.samples + b.samples,
            general_violations: a.general_violations + b.general_violations,
            same_sign_samples: a.same_sign_samples + b.same_sign_samples,
            same_sign_violations: a.same_sign_violations + b.same_sign_violations,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_gp(x: &[f64], y: &[f64], p: f64) -> f64 {
        let nx = norm(x);
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
        let cross = if nx == 0.0 { 0.0 } else { p * nx.powf(p - 2.0) * dot(x, &d) };
        norm(y).powf(p) - nx.powf(p) - cross
    }

    #[test]
    fn gp_examples() {
        assert_eq!(g_p(&[1.0, 2.0], &[1.0, 2.0], 3.0), 0.0);
        assert!((g_p(&[1.0, 0.0], &[0.0, 0.0], 3.0) - 2.0).abs() < 1e-15);
        let x = [0.3, -1.2, 4.0];
        let y = [2.0, 0.5, -1.0];
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (b - a) * (b - a)).sum();
        assert_eq!(g_p(&x, &y, 2.0), d2);
        // X = 0 and p < 2 uses the limit of the cross term
        assert!((g_p(&[0.0, 0.0], &[3.0, 4.0], 1.5) - 5f64.powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn gp_matches_naive_formula_away_from_cancellation() {
        let cases = [([1.0, 0.0], [0.2, 3.0], 1.5), ([2.0, 1.0], [-1.0, 0.5], 3.0), ([1.0, 1.0], [1.5, 0.7], 4.0)];
        for (x, y, p) in cases {
            let a = g_p(&x, &y, p);
            let b = naive_gp(&x, &y, p);
            assert!((a - b).abs() <= 1e-13 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn gp_stable_for_nearby_points() {
        // G_p(X, X + h) ≈ p(p-1)/2 |X|^{p-2} h² along X
        let p = 1.5;
        let h = 1e-7;
        let g = g_p(&[1.0], &[1.0 + h], p);
        let approx = 0.5 * p * (p - 1.0) * h * h;
        assert!((g - approx).abs() < 1e-6 * approx, "{g} vs {approx}");
    }

    #[test]
    fn z_vector_examples() {
        let z = fz_z_vector(&[1.0, 0.0], &[2.0, 0.0], 1.5).unwrap();
        assert!((z[0] - 9.0 / 16.0).abs() < 1e-15 && z[1] == 0.0);
        assert_eq!(fz_z_vector(&[3.0, 0.0], &[1.0, 0.0], 1.5).unwrap(), vec![3.0, 0.0]);
        assert_eq!(fz_z_vector(&[1.0, 0.0], &[2.0, 0.0], 3.0).unwrap(), vec![1.0, 0.0]);
        // p > 2, |x| >= |s|: (|s|/|x|)^{1/(p-2)} s
        let z = fz_z_vector(&[4.0, 0.0], &[0.0, 2.0], 3.0).unwrap();
        assert!((z[1] - 1.0).abs() < 1e-15);
        assert!(fz_z_vector(&[0.0], &[0.0], 3.0).is_err());
        assert!(fz_z_vector(&[1.0], &[1.0], 2.0).is_err());
    }

    #[test]
    fn fz_bound_examples() {
        assert_eq!(fz_lower_bound(&[1.0, 2.0], &[0.0, 0.0], 1.5, 0.3, 0.2).unwrap(), 0.0);
        // p = 3: z = x, bracket = 3·1·1 + 3·1·1·(1-2)² = 6
        let v = fz_lower_bound(&[1.0, 0.0], &[1.0, 0.0], 3.0, 0.5, 0.1).unwrap();
        assert!((v - 1.6).abs() < 1e-14, "{v}");
        let v = fz_lower_bound(&[1.0, 0.0], &[2.0, 0.0], 1.5, 1.0, 0.5).unwrap();
        assert!((v - 0.5 * 2f64.powf(1.5)).abs() < 1e-14);
        let v = fz_lower_bound(&[1.0, 0.0], &[2.0, 0.0], 3.0, 1.0, 0.5).unwrap();
        assert!((v - 4.0).abs() < 1e-14);
        assert!(fz_lower_bound(&[1.0], &[1.0], 3.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(cor_lower_bound_kernel(&[1.0, 1.0], &[1.0, 1.0], 1.5), 0.0);
        assert!((cor_lower_bound_kernel(&[0.0, 0.0], &[3.0, 4.0], 3.0) - 125.0).abs() < 1e-12);
        assert!((cor_lower_bound_kernel(&[1.0, 0.0], &[3.0, 0.0], 1.5) - 2f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn cp_at_two_is_exactly_one() {
        let c = estimate_cp(2.0, 20_000, 7).unwrap();
        assert!((c.value - 1.0).abs() <= 1e-12, "{}", c.value);
        assert!(estimate_cp(2.0, 100, 7).is_err());
    }

    #[test]
    fn cp_witness_reproduces_value() {
        let c = estimate_cp(3.0, 20_000, 11).unwrap();
        let Witness::Vectors(w) = &c.worst_witness else { panic!("vector witness expected") };
        let again = cp_ratio(&w.x, &w.y, w.p).unwrap();
        assert!((again - c.value).abs() <= 1e-12 * c.value);
        assert!(c.value > 0.0 && c.value <= 1.0);
    }

    #[test]
    fn cp_is_seed_deterministic() {
        let a = estimate_cp(1.5, 20_000, 3).unwrap();
        let b = estimate_cp(1.5, 20_000, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lemma_a_examples() {
        let r = lemma_a_check(2.0, 2.0, 1.5).unwrap();
        assert_eq!(r.general.lhs, 0.0);
        assert!(!r.violated());
        let r = lemma_a_check(1.0, 0.0, 1.5).unwrap();
        assert!((r.general.lhs - 1.0).abs() < 1e-15 && (r.general.rhs - 4.0).abs() < 1e-15);
        assert!(r.same_sign.is_none());
        let r = lemma_a_check(1.0, -1.0, 1.5).unwrap();
        assert!((r.general.lhs - 4.0).abs() < 1e-15);
        assert!((r.general.rhs - 4.0 * 2f64.powf(1.5)).abs() < 1e-12);
        assert!(!r.violated());
        assert!(lemma_a_check(1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn power_sum_examples() {
        let r = power_sum_bound_check(1.0, 1.0, 2.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 4.0));
        assert!(!r.violated);
        assert_eq!(power_sum_bound_check(1.0, -1.0, 0.7).unwrap().lhs, 0.0);
        let r = power_sum_bound_check(3.0, 1.0, 0.5).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-15 && (r.rhs - (3f64.sqrt() + 1.0)).abs() < 1e-15);
        assert!(power_sum_bound_check(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn small_scan_is_clean() {
        let rep = scan_vector_inequalities(1.5, 8192, 5, 3, &[0.25, 0.5, 1.0], None).unwrap();
        assert_eq!(rep.violations(), 0, "{rep:?}");
        let lemma = scan_lemma_a(8192, 5);
        assert_eq!(lemma.general_violations + lemma.same_sign_violations, 0);
        assert!(lemma.same_sign_samples > 0);
    }
}
