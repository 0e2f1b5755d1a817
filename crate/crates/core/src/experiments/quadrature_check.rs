//! Sensitivity of the CKN terms to the number of nodes per panel.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use super::report::{fmt_f64, Tabular};
use crate::error::Result;
use crate::functionals::ckn_terms;
use crate::radial::QuadratureScheme;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingRow {
    pub label: String,
    pub params_index: usize,
    /// Largest relative change of the three terms when the node count doubles.
    pub rel_change: f64,
}

impl Tabular for DoublingRow {
    fn header() -> Vec<&'static str> {
        vec!["label", "params_index", "rel_change"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.label.clone(), self.params_index.to_string(), fmt_f64(self.rel_change)]
    }
}

/// Recomputes every pair's terms with twice the nodes per panel.
pub fn node_doubling_check(corpus: &Corpus, scheme: &QuadratureScheme) -> Result<Vec<DoublingRow>> {
    let fine = scheme.clone().with_nodes(2 * scheme.nodes_per_panel);
    corpus
        .pairs()
        .par_iter()
        .filter(|(e, _, _)| !e.profile.is_zero())
        .map(|(e, k, params)| {
            let a = ckn_terms(&e.profile, params, scheme)?;
            let b = ckn_terms(&e.profile, params, &fine)?;
            let rel = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) };
            let rel_change = rel(a.grad, b.grad).max(rel(a.mass, b.mass)).max(rel(a.mixed, b.mixed));
            Ok(DoublingRow { label: e.profile.label.clone(), params_index: *k, rel_change })
        })
        .collect()
}
