//! Numerical verification of first-order L^p Caffarelli–Kohn–Nirenberg
//! inequalities, their deficit identities and stability estimates.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod manifold;
pub mod optimize;
pub mod params;
pub mod radial;
pub mod vectorineq;

pub use error::{CknError, Result};
pub use params::{CknParams, Region, TheoremId};
