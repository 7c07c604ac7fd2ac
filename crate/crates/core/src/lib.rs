// negated comparisons are used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brackets;
pub mod error;
pub mod expansion;
pub mod generic;
pub mod oracle_extraction;
pub mod periodic;
pub mod piecewise;
pub mod potential;
pub mod reference;
pub mod scattering;
