//! Integral means spectra of univalent maps of the unit disk.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod families;
pub mod funcalg;
pub mod gauss;
pub mod norms;
pub mod quadrature;
pub mod spectrum;

pub use error::{ImsError, Result};
pub use funcalg::AnalyticMap;
