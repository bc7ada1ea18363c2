//! Campbell–Baker–Hausdorff–Dynkin series: exact coefficients, Dynkin
//! polynomials, Lie-algebra backends, the enlarged convergence domain and the
//! ODE lifetime comparison that certifies it.

// NaN inputs must fail the range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeffs;
pub mod domain;
pub mod error;
pub mod freelie;
pub mod liealg;
pub mod numfmt;
pub mod odecmp;
pub mod quad;
pub mod series;

pub use error::{Error, Result};
