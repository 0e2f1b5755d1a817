//! Residuals of the two deficit identities over a corpus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, ProfileFamily};
use super::report::{fmt_f64, Summary, Tabular};
use crate::functionals::{
    ckn_terms, deficit_si_from_terms, deficit_sni_from_terms, identity_rhs_sni, identity_rhs_si_with_terms,
};
use crate::params::{hypotheses_hold, sharp_constant_lp, CknParams, TheoremId};
use crate::radial::{QuadratureScheme, RadialProfile};

/// Relative residual accepted by [`verify_identities`].
pub const IDENTITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub label: String,
    pub params_index: usize,
    pub params: CknParams,
    pub family: ProfileFamily,
    pub deficit_sni: f64,
    pub rhs_sni: f64,
    /// `|deficit - rhs|` over the sum of the absolute terms of the deficit.
    pub residual_sni: f64,
    pub deficit_si: f64,
    pub rhs_si: f64,
    pub residual_si: f64,
    pub status: RowStatus,
    pub note: String,
}

impl Tabular for IdentityRow {
    fn header() -> Vec<&'static str> {
        vec![
            "label", "params_index", "n", "p", "a", "b", "deficit_sni", "rhs_sni", "residual_sni", "deficit_si",
            "rhs_si", "residual_si", "status", "note",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.label.clone(),
            self.params_index.to_string(),
            self.params.n.to_string(),
            fmt_f64(self.params.p),
            fmt_f64(self.params.a),
            fmt_f64(self.params.b),
            fmt_f64(self.deficit_sni),
            fmt_f64(self.rhs_sni),
            fmt_f64(self.residual_sni),
            fmt_f64(self.deficit_si),
            fmt_f64(self.rhs_si),
            fmt_f64(self.residual_si),
            format!("{:?}", self.status).to_lowercase(),
            self.note.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityRow>,
    pub summary: Summary,
    pub max_residual: f64,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.summary.all_pass()
    }
}

fn check_pair(u: &RadialProfile, params: &CknParams, scheme: &QuadratureScheme) -> crate::Result<[f64; 6]> {
    let terms = ckn_terms(u, params, scheme)?;
    let p = params.p;
    let k = params.sharp_numerator().abs();
    let d_sni = deficit_sni_from_terms(&terms, scheme.rel_tol).value;
    let r_sni = identity_rhs_sni(u, params, scheme)?;
    let scale_sni = terms.grad + (p - 1.0) * terms.mass + k * terms.mixed;
    let d_si = deficit_si_from_terms(&terms, sharp_constant_lp(params), scheme.rel_tol).value;
    let r_si = identity_rhs_si_with_terms(u, &terms, scheme)?;
    let scale_si = terms.product() + sharp_constant_lp(params) * terms.mixed;
    Ok([d_sni, r_sni, (d_sni - r_sni).abs() / scale_sni, d_si, r_si, (d_si - r_si).abs() / scale_si])
}

/// Both identity residuals for every `(profile, params)` pair.
pub fn verify_identities(corpus: &Corpus, scheme: &QuadratureScheme) -> IdentityReport {
    let pairs = corpus.pairs();
    let rows: Vec<IdentityRow> = pairs
        .par_iter()
        .map(|(entry, k, params)| {
            let u = &entry.profile;
            let mut row = IdentityRow {
                label: u.label.clone(),
                params_index: *k,
                params: *params,
                family: entry.family,
                deficit_sni: f64::NAN,
                rhs_sni: f64::NAN,
                residual_sni: f64::NAN,
                deficit_si: f64::NAN,
                rhs_si: f64::NAN,
                residual_si: f64::NAN,
                status: RowStatus::Skipped,
                note: String::new(),
            };
            if u.is_zero() {
                row.note = "zero function".into();
                return row;
            }
            if !hypotheses_hold(TheoremId::Thm6, params) {
                row.note = "identity hypotheses fail".into();
                return row;
            }
            match check_pair(u, params, scheme) {
                Ok([d_sni, r_sni, e_sni, d_si, r_si, e_si]) => {
                    row.deficit_sni = d_sni;
                    row.rhs_sni = r_sni;
                    row.residual_sni = e_sni;
                    row.deficit_si = d_si;
                    row.rhs_si = r_si;
                    row.residual_si = e_si;
                    let ok = e_sni <= IDENTITY_TOL && e_si <= IDENTITY_TOL;
                    row.status = if ok { RowStatus::Pass } else { RowStatus::Fail };
                }
                Err(e) => {
                    row.status = RowStatus::Fail;
                    row.note = e.to_string();
                }
            }
            row
        })
        .collect();
    let pass_count = rows.iter().filter(|r| r.status == RowStatus::Pass).count();
    let fail_count = rows.iter().filter(|r| r.status == RowStatus::Fail).count();
    let max_residual = rows
        .iter()
        .filter(|r| r.status != RowStatus::Skipped)
        .flat_map(|r| [r.residual_sni, r.residual_si])
        .fold(0.0, |m: f64, x| if x.is_nan() { m } else { m.max(x) });
    let summary = Summary {
        pass_count,
        fail_count,
        min_ratio: None,
        excluded_count: rows.len() - pass_count - fail_count,
    };
    IdentityReport { rows, summary, max_residual }
}
