//! Critical orders for bilinear pseudo-differential operators in `BS^m_{rho,rho}`:
//! exact exponent geometry, a mechanized necessity derivation, and numerical
//! blow-up experiments for the lattice counterexample.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bumps;
pub mod counterexample;
pub mod derivation;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod harness;
pub mod lattice;
pub mod operator;
pub mod stochastics;
pub mod trig;
pub mod wainger;

pub use error::{Error, Result};
