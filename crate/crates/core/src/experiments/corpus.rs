//! Test-function corpora.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};
use crate::functionals::ckn_terms;
use crate::params::{CknParams, Region};
use crate::radial::{
    bump_profile, check_origin_integrability, extremal_profile, extremal_profile_q, perturbed, QuadratureScheme,
    RadialProfile,
};

/// Where a corpus profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProfileFamily {
    Bump,
    Extremal { lam: f64 },
    Perturbed { eps: f64 },
    QExtremal,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub profile: RadialProfile,
    /// Index into `params_sets` for profiles built from one parameter set;
    /// `None` pairs the profile with every set.
    pub params_index: Option<usize>,
    #[serde(flatten)]
    pub family: ProfileFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub params_sets: Vec<CknParams>,
    pub seed: u64,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(entry, params)` pairs in a fixed order: parameter sets outermost.
    pub fn pairs(&self) -> Vec<(&CorpusEntry, usize, CknParams)> {
        let mut out = Vec::new();
        for (k, params) in self.params_sets.iter().enumerate() {
            for e in &self.entries {
                if e.params_index.is_none_or(|i| i == k) {
                    out.push((e, k, *params));
                }
            }
        }
        out
    }

    /// Entries usable with `params`.
    pub fn compatible(&self, params: &CknParams) -> Vec<&CorpusEntry> {
        self.entries
            .iter()
            .filter(|e| e.params_index.is_none_or(|i| self.params_sets.get(i) == Some(params)))
            .collect()
    }

    /// Profiles counted per parameter set, bumps included.
    pub fn profiles_for(&self, index: usize) -> usize {
        self.entries.iter().filter(|e| e.params_index.is_none_or(|i| i == index)).count()
    }

    pub fn merge(mut self, other: Corpus) -> Corpus {
        let offset = self.params_sets.len();
        self.params_sets.extend(other.params_sets);
        self.entries.extend(other.entries.into_iter().map(|mut e| {
            e.params_index = e.params_index.map(|i| i + offset);
            e
        }));
        self
    }

    /// Checks that every pair has finite CKN terms.
    pub fn check_integrability(&self, scheme: &QuadratureScheme) -> Result<()> {
        for (e, _, params) in self.pairs() {
            if e.profile.is_zero() {
                continue;
            }
            ckn_terms(&e.profile, &params, scheme)?;
        }
        Ok(())
    }
}

const BUMP_INTERVALS: [(f64, f64); 5] = [(0.1, 0.5), (0.3, 1.2), (0.5, 2.0), (1.0, 4.0), (2.5, 10.0)];
const EXTREMAL_LAMS: [f64; 3] = [0.5, 1.0, 2.0];
const PERTURBATION_EPS: [f64; 3] = [0.01, 0.1, 0.5];
const PERTURBATION_BUMPS: [(f64, f64); 2] = [(0.5, 1.5), (1.0, 3.0)];

fn seeded_bumps(seed: u64) -> Vec<RadialProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BUMP_INTERVALS
        .iter()
        .map(|&(r0, r1)| {
            // jitter inside [0.1, 10] without letting the interval collapse
            let lo = (r0 * rng.gen_range(0.9..1.1f64)).max(0.1);
            let hi = (r1 * rng.gen_range(0.9..1.1f64)).min(10.0);
            let amp = rng.gen_range(0.5..2.0);
            bump_profile(lo, hi, amp).expect("bump interval is nondegenerate")
        })
        .collect()
}

/// The perturbations `extremal(1, 1)·(1 + ε·bump)` for one parameter set.
pub fn perturbed_extremals(params: &CknParams) -> Result<Vec<(RadialProfile, f64)>> {
    let base = extremal_profile(params, 1.0, 1.0)?;
    let mut out = Vec::new();
    for &(r0, r1) in &PERTURBATION_BUMPS {
        let bump = bump_profile(r0, r1, 1.0)?;
        for &eps in &PERTURBATION_EPS {
            out.push((perturbed(&base, eps, &bump), eps));
        }
    }
    Ok(out)
}

fn q_profile(params: &CknParams) -> Result<Option<RadialProfile>> {
    if params.p != 2.0 {
        return Ok(None);
    }
    let beta = match params.region() {
        Region::Q1 => 1.0,
        Region::Q2 => -1.0,
        _ => return Ok(None),
    };
    Ok(Some(extremal_profile_q(params.n, params.a, params.b, 1.0, beta)?))
}

/// Whether all three CKN terms of `u` converge at the origin.
fn admissible(u: &RadialProfile, params: &CknParams) -> bool {
    let (p, n) = (params.p, params.n);
    check_origin_integrability(u, true, p, params.grad_weight(), n).is_ok()
        && check_origin_integrability(u, false, p, params.mass_weight(), n).is_ok()
        && check_origin_integrability(u, false, p, params.mixed_weight(), n).is_ok()
}

/// Bumps, extremals, perturbed extremals and (for `p = 2` in Q) one
/// Q-family profile per parameter set.
pub fn build_default_corpus(params_sets: &[CknParams], seed: u64) -> Result<Corpus> {
    if params_sets.is_empty() {
        return Err(CknError::InvalidArgument("corpus needs at least one parameter set".into()));
    }
    let mut entries = Vec::new();
    for b in seeded_bumps(seed) {
        entries.push(CorpusEntry { profile: b, params_index: None, family: ProfileFamily::Bump });
    }
    for (k, params) in params_sets.iter().enumerate() {
        params.validate()?;
        // outside the family's range (b - a + 1 <= 0) or when its terms
        // diverge at the origin the extremal-based entries are left out
        if params.manifold_exponent() > 0.0 && admissible(&extremal_profile(params, 1.0, 1.0)?, params) {
            for &lam in &EXTREMAL_LAMS {
                let profile = extremal_profile(params, 1.0, lam)?;
                entries.push(CorpusEntry { profile, params_index: Some(k), family: ProfileFamily::Extremal { lam } });
            }
            for (profile, eps) in perturbed_extremals(params)? {
                entries.push(CorpusEntry { profile, params_index: Some(k), family: ProfileFamily::Perturbed { eps } });
            }
        }
        if let Some(profile) = q_profile(params)?.filter(|q| admissible(q, params)) {
            entries.push(CorpusEntry { profile, params_index: Some(k), family: ProfileFamily::QExtremal });
        }
    }
    Ok(Corpus { entries, params_sets: params_sets.to_vec(), seed })
}

/// Only the perturbed extremals of one parameter set.
pub fn perturbed_extremal_corpus(params: &CknParams, seed: u64) -> Result<Corpus> {
    let entries = perturbed_extremals(params)?
        .into_iter()
        .map(|(profile, eps)| CorpusEntry { profile, params_index: Some(0), family: ProfileFamily::Perturbed { eps } })
        .collect();
    Ok(Corpus { entries, params_sets: vec![*params], seed })
}

/// A corpus of arbitrary profiles paired with every parameter set.
pub fn custom_corpus(profiles: Vec<RadialProfile>, params_sets: &[CknParams], seed: u64) -> Corpus {
    Corpus {
        entries: profiles
            .into_iter()
            .map(|profile| CorpusEntry { profile, params_index: None, family: ProfileFamily::Custom })
            .collect(),
        params_sets: params_sets.to_vec(),
        seed,
    }
}
