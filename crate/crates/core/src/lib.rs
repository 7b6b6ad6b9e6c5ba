//! Spectra of the p-Laplacian on intervals, boxes, box unions and flat tori,
//! together with counting functions and numerical checks of the associated
//! monotonicity inequalities and Weyl asymptotics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discrete;
pub mod domain;
pub mod energy;
pub mod error;
pub mod exact;
pub mod exact_spectra;
pub mod packing;
pub mod spectrum;
pub mod sweep;
pub mod weyl;

pub use error::{Error, Result};
