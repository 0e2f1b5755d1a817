//! Verification campaigns over corpora of radial profiles.

pub mod corpus;
pub mod identities;
pub mod poincare;
pub mod quadrature_check;
pub mod report;
pub mod stability;

pub use corpus::{build_default_corpus, perturbed_extremal_corpus, Corpus, CorpusEntry, ProfileFamily};
pub use identities::{verify_identities, IdentityReport, IdentityRow, IDENTITY_TOL};
pub use poincare::{
    change_of_variables_check, default_poincare_configs, default_poincare_profiles, poincare_campaign, poincare_check,
    poincare_scaling_check, ConsistencyReport, PoincareConfig, PoincareDomain, PoincareReport, PoincareRow,
};
pub use quadrature_check::{node_doubling_check, DoublingRow};
pub use report::{csv_string, fmt_f64, write_csv, Summary, Tabular};
pub use stability::{estimate_stability_constant, StabilityEstimate, StabilityRow};
