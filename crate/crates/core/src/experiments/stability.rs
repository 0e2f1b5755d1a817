//! Empirical stability constants `deficit / (prefactor · distance)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, ProfileFamily};
use super::report::{fmt_f64, Summary, Tabular};
use crate::error::{CknError, Result};
use crate::functionals::{deficit_si_detailed, deficit_sni_detailed, stability_distance, StabilityVariant};
use crate::manifold::{project, OptConfig};
use crate::params::{require_hypotheses, CknParams, TheoremId};
use crate::radial::QuadratureScheme;
use crate::vectorineq::{EmpiricalConstant, Witness};

/// Pairs whose projected distance is below this multiple of
/// `rel_tol · (distance at c = 0)` are excluded.
pub const EXCLUSION_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub label: String,
    pub family: ProfileFamily,
    pub deficit: f64,
    pub deficit_resolved: bool,
    pub prefactor: f64,
    pub distance: f64,
    /// Distance to the zero function, the scale for exclusion.
    pub distance_zero: f64,
    pub c_star: f64,
    pub lam_star: f64,
    pub boundary_hit: bool,
    pub ratio: f64,
    pub excluded: bool,
    pub note: String,
}

impl Tabular for StabilityRow {
    fn header() -> Vec<&'static str> {
        vec![
            "label", "family", "deficit", "deficit_resolved", "prefactor", "distance", "distance_zero", "c_star",
            "lam_star", "boundary_hit", "ratio", "excluded", "note",
        ]
    }

    fn record(&self) -> Vec<String> {
        let family = match self.family {
            ProfileFamily::Bump => "bump".to_string(),
            ProfileFamily::Extremal { lam } => format!("extremal:{lam}"),
            ProfileFamily::Perturbed { eps } => format!("perturbed:{eps}"),
            ProfileFamily::QExtremal => "q_extremal".to_string(),
            ProfileFamily::Custom => "custom".to_string(),
        };
        vec![
            self.label.clone(),
            family,
            fmt_f64(self.deficit),
            self.deficit_resolved.to_string(),
            fmt_f64(self.prefactor),
            fmt_f64(self.distance),
            fmt_f64(self.distance_zero),
            fmt_f64(self.c_star),
            fmt_f64(self.lam_star),
            self.boundary_hit.to_string(),
            fmt_f64(self.ratio),
            self.excluded.to_string(),
            self.note.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub theorem: TheoremId,
    pub params: CknParams,
    pub constant: EmpiricalConstant,
    pub excluded: usize,
    pub rows: Vec<StabilityRow>,
}

impl StabilityEstimate {
    pub fn summary(&self) -> Summary {
        let included = self.rows.iter().filter(|r| !r.excluded);
        let fail_count = included.clone().filter(|r| !(r.ratio > 0.0)).count();
        Summary {
            pass_count: included.count() - fail_count,
            fail_count,
            min_ratio: Some(self.constant.value),
            excluded_count: self.excluded,
        }
    }
}

fn uses_scale_invariant_deficit(theorem: TheoremId) -> bool {
    matches!(theorem, TheoremId::Thm1 | TheoremId::Thm2)
}

fn evaluate(
    entry: &super::corpus::CorpusEntry,
    params: &CknParams,
    theorem: TheoremId,
    variant: StabilityVariant,
    scheme: &QuadratureScheme,
    cfg: &OptConfig,
) -> Result<StabilityRow> {
    let u = &entry.profile;
    let p = params.p;
    let deficit = if uses_scale_invariant_deficit(theorem) {
        deficit_si_detailed(u, params, scheme, None)?
    } else {
        deficit_sni_detailed(u, params, scheme)?
    };
    let prefactor = if uses_scale_invariant_deficit(theorem) {
        (deficit.terms.grad / deficit.terms.mass).powf(1.0 / p)
    } else {
        1.0
    };
    let proj = project(u, params, variant, scheme, cfg)?;
    let distance_zero = stability_distance(u, params, variant, 0.0, 1.0, scheme)?;
    let excluded = proj.distance <= EXCLUSION_FACTOR * scheme.rel_tol * distance_zero;
    let ratio = deficit.value / (prefactor * proj.distance);
    Ok(StabilityRow {
        label: u.label.clone(),
        family: entry.family,
        deficit: deficit.value,
        deficit_resolved: deficit.resolved,
        prefactor,
        distance: proj.distance,
        distance_zero,
        c_star: proj.c_star,
        lam_star: proj.lam_star,
        boundary_hit: proj.boundary_hit,
        ratio,
        excluded,
        note: String::new(),
    })
}

/// Minimum over the corpus of `deficit / (prefactor · projected distance)`.
pub fn estimate_stability_constant(
    corpus: &Corpus,
    params: &CknParams,
    theorem: TheoremId,
    scheme: &QuadratureScheme,
    cfg: &OptConfig,
) -> Result<StabilityEstimate> {
    require_hypotheses(theorem, params)?;
    let variant = StabilityVariant::for_theorem(theorem)
        .ok_or_else(|| CknError::InvalidArgument(format!("{theorem} has no stability distance")))?;
    let entries = corpus.compatible(params);
    if entries.is_empty() {
        return Err(CknError::InvalidArgument(format!("no corpus profile is compatible with {params}")));
    }
    let rows: Vec<StabilityRow> = entries
        .par_iter()
        .map(|e| evaluate(e, params, theorem, variant, scheme, cfg))
        .collect::<Result<Vec<_>>>()?;
    let excluded = rows.iter().filter(|r| r.excluded).count();
    let worst = rows
        .iter()
        .filter(|r| !r.excluded)
        .min_by(|a, b| a.ratio.total_cmp(&b.ratio))
        .ok_or(CknError::AllExcluded { excluded })?;
    let constant = EmpiricalConstant {
        value: worst.ratio,
        sample_count: rows.len() - excluded,
        worst_witness: Witness::Profile { label: worst.label.clone() },
        scan_description: format!("{theorem} with {variant} at {params}"),
        seed: corpus.seed,
    };
    Ok(StabilityEstimate { theorem, params: *params, constant, excluded, rows })
}
